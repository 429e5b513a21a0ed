"""Primal-dual path-following interior-point method for small dense SDPs.

Problem form (see :mod:`diquant.solver.problem`)::

    min  c·x + c0      s.t.  A x = b,   S_k = F0_k + Σ_i x_i F_ik ⪰ 0

with dual::

    max  c0 - Σ_k <F0_k, Z_k> + b·y    s.t.  Σ_k F_k*(Z_k) + Aᵀy = c,  Z_k ⪰ 0.

The variables ``x`` are free, so no splitting or elimination is required; the
slack ``S`` is carried as an independent iterate which allows infeasible
starts. Search directions are HKM with a Mehrotra predictor-corrector. Each
Newton step reduces to the Schur matrix ``M_ij = Σ_k tr(F_i S⁻¹ F_j Z)``,
factored by dense Cholesky, plus a second Cholesky on ``A M⁻¹ Aᵀ`` for the
equalities. Linearly dependent equality rows are removed up front and an
inconsistent system is reported as primal infeasible.
"""

import contextlib
import contextvars
import logging

import numpy as np
import scipy.linalg as sla

from .problem import SdpSolution, Status

log = logging.getLogger(__name__)

DEFAULTS = dict(
    gap_tol=1e-8,
    feas_tol=1e-8,
    max_iter=200,
    step_frac=0.95,
    stall_iters=30,
    stall_resid=1e-5,
    stall_mu=1e-10,
    loose_tol=1e-6,
    max_dense=8000,
    blowup=1e10,
)

_OVERRIDES = contextvars.ContextVar("solver_overrides", default={})


@contextlib.contextmanager
def options(**overrides):
    """Override :data:`DEFAULTS` for every solve inside the block."""
    token = _OVERRIDES.set({**_OVERRIDES.get(), **overrides})
    try:
        yield
    finally:
        _OVERRIDES.reset(token)


def _sym(m):
    return (m + m.T) / 2


def _prune_equalities(A, b, tol=1e-10):
    """Drop dependent rows of ``A x = b``; flag inconsistency."""
    if A.shape[0] == 0:
        return A, b, True
    q, r, piv = sla.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    rank = int(np.sum(diag > tol * max(scale, 1.0)))
    keep = np.sort(piv[:rank])
    A2, b2 = A[keep], b[keep]
    if rank < A.shape[0]:
        x_ls, *_ = np.linalg.lstsq(A2, b2, rcond=None)
        resid = np.abs(A @ x_ls - b).max()
        if resid > 1e-7 * (1 + np.abs(b).max()):
            return A2, b2, False
    return A2, b2, True


def _max_step(X, dX):
    """Largest α ≤ 1 (times infinity cap) with X + α dX ⪰ 0, for X ≻ 0."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    Li = sla.solve_triangular(L, np.eye(len(X)), lower=True)
    W = _sym(Li @ dX @ Li.T)
    lam = np.linalg.eigvalsh(W)[0]
    if lam >= 0:
        return np.inf
    return -1.0 / lam


class _Schur:
    """Assembles the Schur matrix ``M_ij = tr(F_i S⁻¹ F_j Z)`` for the current iterate.

    Each ``F_j`` is sparse, so ``S⁻¹ F_j Z`` is formed as a sum of outer
    products of columns of ``S⁻¹`` and rows of ``Z``. Rows are grouped by
    their number of nonzeros so the products run as batched matmuls.
    """

    def __init__(self, problem):
        self.p = problem
        self.groups = [self._group(blk) for blk in problem.blocks]

    @staticmethod
    def _group(blk):
        F = blk.coeffs.tocsr()
        m = blk.dim
        k = F.shape[0]
        if F.nnz > 0.05 * k * m * m and k * m * m <= 5e7:
            return F.toarray(), None
        nnz = np.diff(F.indptr)
        out = []
        for q in np.unique(nnz):
            if q == 0:
                continue
            rows = np.flatnonzero(nnz == q)
            pos = F.indptr[rows][:, None] + np.arange(q)[None, :]
            idx = F.indices[pos]
            out.append((rows, idx // m, idx % m, F.data[pos]))
        return F, out

    def matrix(self, Sinv, Z):
        n = self.p.n_vars
        M = np.zeros((n, n))
        for blk, (F, groups), si, z in zip(self.p.blocks, self.groups, Sinv, Z):
            idx = blk.var_idx
            if len(idx) == 0:
                continue
            m = blk.dim
            if groups is None:
                # dense coefficients: M_blk = F (S⁻¹ F_j Z)_j with BLAS throughout
                H = (si @ F.reshape(-1, m, m) @ z).reshape(len(idx), m * m)
                M[np.ix_(idx, idx)] += F @ H.T
                continue
            for rows, r, c, v in groups:
                q = r.shape[1]
                if q > 2 * m:
                    # dense coefficient matrices: two dense products are cheaper
                    for s in range(0, len(rows), 64):
                        sel = rows[s:s + 64]
                        Fd = F[sel].toarray().reshape(-1, m, m)
                        H = si @ Fd @ z
                        M[idx[:, None], idx[sel][None, :]] += F @ H.reshape(len(sel), m * m).T
                    continue
                chunk = max(1, int(4e6 // (m * max(m, q))))
                for s in range(0, len(rows), chunk):
                    sl = slice(s, s + chunk)
                    left = si[:, r[sl]].transpose(1, 0, 2) * v[sl][:, None, :]  # (b, m, q)
                    H = left @ z[c[sl], :]  # (b, m, m)
                    M[idx[:, None], idx[rows[sl]][None, :]] += F @ H.reshape(len(H), m * m).T
        _symmetrize(M)
        return M


def _symmetrize(M, step=1024):
    """In-place ``M ← (M + Mᵀ)/2`` without a full-size temporary."""
    n = M.shape[0]
    for i in range(0, n, step):
        I = slice(i, i + step)
        M[I, I] = _sym(M[I, I])
        for j in range(i + step, n, step):
            J = slice(j, j + step)
            T = (M[I, J] + M[J, I].T) / 2
            M[I, J] = T
            M[J, I] = T.T


def solve(problem, **opts):
    """Solve an :class:`SdpProblem`; see module docstring for the method.

    Keyword options override :data:`DEFAULTS`. The returned optimum follows
    the problem's sense (a maximisation is reported as a maximum).
    """
    o = dict(DEFAULTS)
    o.update(_OVERRIDES.get())
    o.update(opts)
    p = problem
    n = p.n_vars
    A, b, consistent = _prune_equalities(p.eq_matrix, p.eq_rhs)
    nb = len(p.blocks)
    dims = [blk.dim for blk in p.blocks]
    if not consistent:
        return _finish(p, Status.PRIMAL_INFEASIBLE, np.zeros(n), np.zeros(len(b)), [], [], np.inf,
                       (np.inf, np.inf), np.nan, np.nan, 0)
    if nb == 0:
        raise ValueError("problem has no semidefinite blocks")
    if n + len(b) > o["max_dense"]:
        raise MemoryError(f"{n} variables and {len(b)} equalities exceed the dense solver limit "
                          f"max_dense={o['max_dense']}; lower the level")

    c = p.objective
    F0 = [blk.const for blk in p.blocks]
    mtot = sum(dims)
    norm_b = 1.0 + np.linalg.norm(b) + sum(np.linalg.norm(f) for f in F0)
    norm_c = 1.0 + np.linalg.norm(c)

    x = np.linalg.lstsq(A, b, rcond=None)[0] if len(b) else np.zeros(n)
    xi = max(10.0, max(np.abs(f).max() for f in F0) * 10.0, np.sqrt(max(dims)))
    eta = max(10.0, np.abs(c).max() * 10.0 if n else 1.0, np.sqrt(max(dims)))
    S = [xi * np.eye(m) for m in dims]
    Z = [eta * np.eye(m) for m in dims]
    y = np.zeros(len(b))

    schur = _Schur(p)
    stall = 0
    status = Status.MAX_ITERATIONS
    it = 0
    best = None

    def residuals(x, S, Z, y):
        rp = b - A @ x
        rs = [blk.evaluate(x) - s for blk, s in zip(p.blocks, S)]
        Fz = np.zeros(n)
        for blk, z in zip(p.blocks, Z):
            Fz[blk.var_idx] += blk.adjoint(z)
        rd = c - Fz - A.T @ y
        return rp, rs, rd

    worse = 0
    for it in range(1, o["max_iter"] + 1):
        rp, rs, rd = residuals(x, S, Z, y)
        mu = sum(np.vdot(s, z).real for s, z in zip(S, Z)) / mtot
        pobj = c @ x + p.objective_offset
        dobj = p.objective_offset - sum(np.vdot(f, z).real for f, z in zip(F0, Z)) + b @ y
        pinf = (np.linalg.norm(rp) + sum(np.linalg.norm(r) for r in rs)) / norm_b
        dinf = np.linalg.norm(rd) / norm_c
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        log.debug("it %3d pobj %.10g dobj %.10g gap %.2e pinf %.2e dinf %.2e mu %.2e",
                  it, pobj, dobj, gap, pinf, dinf, mu)
        merit = max(gap, pinf, dinf)
        if best is None or merit < best[0]:
            best = (merit, x.copy(), [s.copy() for s in S], [z.copy() for z in Z], y.copy(),
                    gap, pinf, dinf, pobj, dobj)
        if gap <= o["gap_tol"] and pinf <= o["feas_tol"] and dinf <= o["feas_tol"]:
            status = Status.OPTIMAL
            break
        # precision loss near the boundary: keep the best iterate once it is good enough
        worse = worse + 1 if merit > 10 * best[0] else 0
        if worse >= 3 and best[0] <= o["loose_tol"]:
            status = Status.MAX_ITERATIONS
            break
        if max(np.abs(zz).max() for zz in Z) > o["blowup"] and dobj > abs(pobj) + 1.0:
            status = Status.PRIMAL_INFEASIBLE
            break
        if np.abs(x).max() > o["blowup"] and pobj < -abs(dobj) - 1.0:
            status = Status.DUAL_INFEASIBLE
            break
        if mu < o["stall_mu"] and max(pinf, dinf) > o["stall_resid"]:
            stall += 1
            if stall >= o["stall_iters"]:
                if best[0] <= o["loose_tol"]:
                    status = Status.MAX_ITERATIONS
                else:
                    status = Status.PRIMAL_INFEASIBLE if pinf >= dinf else Status.DUAL_INFEASIBLE
                break
        else:
            stall = 0

        try:
            Sinv = [np.linalg.inv(s) for s in S]
            Sinv = [_sym(si) for si in Sinv]
            M = schur.matrix(Sinv, Z)
            kkt = _Kkt(M, A)
        except (np.linalg.LinAlgError, ValueError):
            log.debug("factorisation failed at iteration %d", it)
            break

        def direction(sigma, corr):
            R0 = [sigma * mu * si - z - cc for si, z, cc in zip(Sinv, Z, corr)]
            R = [r0 - _sym(si @ r @ z) for r0, si, r, z in zip(R0, Sinv, rs, Z)]
            FR = np.zeros(n)
            for blk, rr in zip(p.blocks, R):
                FR[blk.var_idx] += blk.adjoint(rr)
            h = rd - FR
            dx, dy = kkt.solve(h, rp)
            dS = [blk.evaluate(dx) - blk.const + r for blk, r in zip(p.blocks, rs)]
            dZ = [r0 - _sym(si @ ds @ z) for r0, si, ds, z in zip(R0, Sinv, dS, Z)]
            return dx, dS, dZ, dy

        zero = [np.zeros((m, m)) for m in dims]
        dx, dS, dZ, dy = direction(0.0, zero)
        ap = min(1.0, min(_max_step(s, d) for s, d in zip(S, dS)))
        ad = min(1.0, min(_max_step(z, d) for z, d in zip(Z, dZ)))
        mu_aff = sum(np.vdot(s + ap * ds, z + ad * dz).real
                     for s, ds, z, dz in zip(S, dS, Z, dZ)) / mtot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        corr = [_sym(si @ ds @ dz) for si, ds, dz in zip(Sinv, dS, dZ)]
        dx, dS, dZ, dy = direction(sigma, corr)
        ap = min(1.0, o["step_frac"] * min(_max_step(s, d) for s, d in zip(S, dS)))
        ad = min(1.0, o["step_frac"] * min(_max_step(z, d) for z, d in zip(Z, dZ)))
        if ap <= 1e-12 and ad <= 1e-12:
            break
        x = x + ap * dx
        S = [_sym(s + ap * d) for s, d in zip(S, dS)]
        y = y + ad * dy
        Z = [_sym(z + ad * d) for z, d in zip(Z, dZ)]

    if status == Status.OPTIMAL:
        rp, rs, rd = residuals(x, S, Z, y)
        pinf = (np.linalg.norm(rp) + sum(np.linalg.norm(r) for r in rs)) / norm_b
        dinf = np.linalg.norm(rd) / norm_c
        pobj = c @ x + p.objective_offset
        dobj = p.objective_offset - sum(np.vdot(f, z).real for f, z in zip(F0, Z)) + b @ y
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    else:
        _, x, S, Z, y, gap, pinf, dinf, pobj, dobj = best
    return _finish(p, status, x, y, S, Z, gap, (pinf, dinf), pobj, dobj, it)


class _Kkt:
    """Solver for ``[[M, -Aᵀ], [A, 0]] [dx; dy] = [-h; rp]`` with iterative refinement.

    Without equalities this is a Cholesky solve with ``M``. Otherwise the
    augmented system is factored directly with LU, which keeps the dual
    residual accurate when ``M`` becomes ill-conditioned near the optimum.
    """

    def __init__(self, M, A):
        n, k = M.shape[0], A.shape[0]
        self.n = n
        self.cho = None
        if k == 0:
            diag = np.diag_indices(n)
            reg = 1e-14 * max(np.abs(M[diag]).max(), 1.0)
            M[diag] += reg
            try:
                self.cho = sla.cho_factor(M)
            except np.linalg.LinAlgError:
                pass
            M[diag] -= reg
            if self.cho is not None:
                self.K = M
                return
        K = np.zeros((n + k, n + k))
        K[:n, :n] = M
        K[:n, n:] = -A.T
        K[n:, :n] = A
        self.d = 1.0 / np.sqrt(np.maximum(np.abs(np.diag(K)), 1.0))
        K *= self.d[:, None]
        K *= self.d[None, :]
        K[np.arange(n), np.arange(n)] += 1e-15
        self.K = K  # scaled system
        self.lu = sla.lu_factor(K, check_finite=True)

    def solve(self, h, rp, refine=2):
        if self.cho is not None:
            rhs = -h
            sol = sla.cho_solve(self.cho, rhs)
            for _ in range(refine):
                sol = sol + sla.cho_solve(self.cho, rhs - self.K @ sol)
            if not np.all(np.isfinite(sol)):
                raise np.linalg.LinAlgError("Cholesky solve produced non-finite values")
            return sol, np.zeros(0)
        rhs = self.d * np.concatenate([-h, rp])
        sol = sla.lu_solve(self.lu, rhs)
        for _ in range(refine):
            sol = sol + sla.lu_solve(self.lu, rhs - self.K @ sol)
        if not np.all(np.isfinite(sol)):
            raise np.linalg.LinAlgError("KKT solve produced non-finite values")
        sol = self.d * sol
        return sol[:self.n], sol[self.n:]


def _finish(p, status, x, y, S, Z, gap, resid, pobj, dobj, it):
    sign = 1.0 if p.sense == "min" else -1.0
    if status == Status.OPTIMAL:
        opt = sign * pobj
    elif status == Status.PRIMAL_INFEASIBLE:
        opt = sign * np.inf
    elif status == Status.DUAL_INFEASIBLE:
        opt = -sign * np.inf
    else:
        opt = sign * pobj
    return SdpSolution(status, float(opt), x, y, float(gap), tuple(float(r) for r in resid),
                       float(sign * pobj), float(sign * dobj), it, list(S), list(Z))
