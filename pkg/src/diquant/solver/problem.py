"""Problem data, solution records and a small modelling layer.

Every program in the package is stated in the linear-matrix-inequality form

    minimize    c·x + c0
    subject to  A x = b
                F0_k + Σ_i x_i F_ik ⪰ 0       for every block k

over a vector ``x`` of free real scalars. Matrix variables are never stored as
such: a symmetric (or Hermitian) matrix variable is a set of scalars together
with the affine map placing them into a matrix, and its positivity is one LMI
block. This keeps free scalars (unknown moments, normalisations) and PSD
variables in one representation, with no splitting into nonnegative parts.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp


class Status(str, Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    MAX_ITERATIONS = "MaxIterations"


@dataclass
class LmiBlock:
    """One block ``F0 + Σ_i x_i F_i ⪰ 0``.

    ``coeffs`` is a sparse matrix of shape ``(len(var_idx), dim*dim)``; row
    ``r`` holds the row-major entries of the coefficient matrix of variable
    ``var_idx[r]``. All matrices are real symmetric.
    """

    dim: int
    const: np.ndarray
    var_idx: np.ndarray
    coeffs: sp.csr_matrix
    name: str = ""

    def evaluate(self, x):
        flat = self.coeffs.T @ x[self.var_idx]
        return self.const + flat.reshape(self.dim, self.dim)

    def adjoint(self, z):
        """Vector of ``<F_i, Z>`` over this block's variables."""
        return self.coeffs @ z.reshape(-1)


@dataclass
class SdpProblem:
    n_vars: int
    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    blocks: list
    objective_offset: float = 0.0
    sense: str = "min"

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.eq_matrix = np.asarray(self.eq_matrix, dtype=float).reshape(-1, self.n_vars)
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        if self.n_vars < 1:
            raise ValueError("problem has no variables")
        if self.objective.shape != (self.n_vars,):
            raise ValueError("objective length does not match variable count")
        if self.eq_matrix.shape[0] != self.eq_rhs.shape[0]:
            raise ValueError("equality matrix and right-hand side disagree")
        for blk in self.blocks:
            if blk.dim < 1:
                raise ValueError("block dimensions must be positive")
            if blk.coeffs.shape != (len(blk.var_idx), blk.dim * blk.dim):
                raise ValueError(f"block {blk.name!r} has malformed coefficients")

    @property
    def psd_blocks(self):
        return [blk.dim for blk in self.blocks]

    @property
    def free_vars(self):
        return self.n_vars


@dataclass
class SdpSolution:
    status: Status
    optimum: float
    primal_point: np.ndarray
    dual_point: np.ndarray
    gap: float
    residuals: tuple
    primal_objective: float = np.nan
    dual_objective: float = np.nan
    iterations: int = 0
    slacks: list = field(default_factory=list)
    duals: list = field(default_factory=list)

    @property
    def ok(self):
        return self.status == Status.OPTIMAL

    def diagnostics(self):
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "gap": float(self.gap),
            "primal_residual": float(self.residuals[0]),
            "dual_residual": float(self.residuals[1]),
            "primal_objective": float(self.primal_objective),
            "dual_objective": float(self.dual_objective),
        }


class SolverError(RuntimeError):
    """Raised when a program that must be solvable is not solved to optimality."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


# --------------------------------------------------------------------------
# modelling layer


class Affine:
    """Real affine scalar ``const + Σ coef[v] x_v``."""

    __slots__ = ("coef", "const")

    def __init__(self, coef=None, const=0.0):
        self.coef = dict(coef) if coef else {}
        self.const = float(const)

    @classmethod
    def var(cls, v):
        return cls({v: 1.0})

    def __add__(self, other):
        out = Affine(self.coef, self.const)
        if isinstance(other, Affine):
            for v, c in other.coef.items():
                out.coef[v] = out.coef.get(v, 0.0) + c
            out.const += other.const
        else:
            out.const += float(other)
        return out

    __radd__ = __add__

    def __neg__(self):
        return Affine({v: -c for v, c in self.coef.items()}, -self.const)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        k = float(k)
        return Affine({v: k * c for v, c in self.coef.items()}, k * self.const)

    __rmul__ = __mul__

    def value(self, x):
        return self.const + sum(c * x[v] for v, c in self.coef.items())

    @property
    def is_constant(self):
        return all(abs(c) == 0.0 for c in self.coef.values())


def affine_sum(items):
    out = Affine()
    for it in items:
        out = out + it
    return out


class AffineMatrix:
    """Square matrix affine in the model variables.

    Stored as a constant part plus triplets ``(var, row, col, value)``; values
    may be complex. Operations return new objects.
    """

    def __init__(self, dim, const=None, var=(), row=(), col=(), val=()):
        self.dim = int(dim)
        self.const = np.zeros((dim, dim), dtype=complex) if const is None else np.asarray(const, dtype=complex)
        self.var = np.asarray(var, dtype=int)
        self.row = np.asarray(row, dtype=int)
        self.col = np.asarray(col, dtype=int)
        self.val = np.asarray(val, dtype=complex)

    @classmethod
    def constant(cls, mat):
        mat = np.asarray(mat)
        return cls(mat.shape[0], mat)

    @classmethod
    def scaled(cls, t, mat):
        """``t · mat`` for a scalar :class:`Affine` ``t`` and a constant matrix."""
        mat = np.asarray(mat, dtype=complex)
        dim = mat.shape[0]
        r, c = np.nonzero(mat)
        var, row, col, val = [], [], [], []
        for v, k in t.coef.items():
            var.append(np.full(len(r), v))
            row.append(r)
            col.append(c)
            val.append(k * mat[r, c])
        if not var:
            return cls(dim, t.const * mat)
        return cls(dim, t.const * mat, np.concatenate(var), np.concatenate(row),
                   np.concatenate(col), np.concatenate(val))

    def __add__(self, other):
        if not isinstance(other, AffineMatrix):
            other = AffineMatrix.constant(other)
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return AffineMatrix(
            self.dim,
            self.const + other.const,
            np.concatenate([self.var, other.var]),
            np.concatenate([self.row, other.row]),
            np.concatenate([self.col, other.col]),
            np.concatenate([self.val, other.val]),
        )

    __radd__ = __add__

    def __mul__(self, k):
        return AffineMatrix(self.dim, k * self.const, self.var, self.row, self.col, k * self.val)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, AffineMatrix) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def trace(self):
        """Real part of the trace as an :class:`Affine`."""
        on = self.row == self.col
        coef = {}
        for v, c in zip(self.var[on], self.val[on].real):
            coef[int(v)] = coef.get(int(v), 0.0) + c
        return Affine(coef, np.trace(self.const).real)

    def entry(self, i, j, part="real"):
        sel = (self.row == i) & (self.col == j)
        vals = self.val[sel].real if part == "real" else self.val[sel].imag
        c0 = self.const[i, j].real if part == "real" else self.const[i, j].imag
        coef = {}
        for v, c in zip(self.var[sel], vals):
            coef[int(v)] = coef.get(int(v), 0.0) + c
        return Affine(coef, c0)

    def inner(self, w):
        """``Re tr(w · self)`` for a constant matrix ``w``, as an :class:`Affine`."""
        w = np.asarray(w)
        vals = (w[self.col, self.row] * self.val).real
        coef = {}
        for v, c in zip(self.var, vals):
            coef[int(v)] = coef.get(int(v), 0.0) + c
        return Affine(coef, np.sum(w.T * self.const).real)

    def permuted(self, perm):
        """Matrix with entries ``out[perm[i], perm[j]] = self[i, j]``."""
        perm = np.asarray(perm)
        const = np.zeros_like(self.const)
        const[np.ix_(perm, perm)] = self.const
        return AffineMatrix(self.dim, const, self.var, perm[self.row], perm[self.col], self.val)

    def remap(self, index_map, dim):
        """Entry ``(i, j)`` moves to ``(index_map[(i, j)])``; used for index shuffles."""
        to_r = np.empty((self.dim, self.dim), dtype=int)
        to_c = np.empty((self.dim, self.dim), dtype=int)
        for (i, j), (r, c) in index_map.items():
            to_r[i, j], to_c[i, j] = r, c
        const = np.zeros((dim, dim), dtype=complex)
        const[to_r, to_c] = self.const
        return AffineMatrix(dim, const, self.var, to_r[self.row, self.col], to_c[self.row, self.col], self.val)

    def congruence(self, w):
        """``w† · self · w`` for a constant ``dim × k`` matrix ``w``."""
        w = np.asarray(w, dtype=complex)
        if w.shape[0] != self.dim:
            raise ValueError("dimension mismatch")
        k = w.shape[1]
        const = w.conj().T @ self.const @ w
        # entry (r, c) of self feeds (i, j) with weight conj(w[r, i]) w[c, j]
        vals = self.val[:, None, None] * w[self.row].conj()[:, :, None] * w[self.col][:, None, :]
        ii, jj = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        shape = vals.shape
        keep = (vals != 0).ravel()
        return AffineMatrix(k, const, np.broadcast_to(self.var[:, None, None], shape).ravel()[keep],
                            np.broadcast_to(ii, shape).ravel()[keep], np.broadcast_to(jj, shape).ravel()[keep],
                            vals.ravel()[keep])

    def value(self, x):
        out = self.const.copy()
        np.add.at(out, (self.row, self.col), self.val * x[self.var])
        return out

    @property
    def is_complex(self):
        return bool(np.any(self.val.imag != 0) or np.any(self.const.imag != 0))


def block_diag_affine(mats):
    """Block-diagonal stacking of affine matrices."""
    dim = sum(m.dim for m in mats)
    const = np.zeros((dim, dim), dtype=complex)
    var, row, col, val = [], [], [], []
    off = 0
    for m in mats:
        const[off:off + m.dim, off:off + m.dim] = m.const
        var.append(m.var)
        row.append(m.row + off)
        col.append(m.col + off)
        val.append(m.val)
        off += m.dim
    return AffineMatrix(dim, const, np.concatenate(var), np.concatenate(row),
                        np.concatenate(col), np.concatenate(val))


class Model:
    """Incremental builder for :class:`SdpProblem`.

    Constraints whose expressions contain no variables are checked on the
    spot; an inconsistent constant equality marks the model infeasible
    instead of being handed to the solver.
    """

    def __init__(self, eq_tol=1e-9):
        self.n_vars = 0
        self._eqs = []
        self._psd = []
        self._objective = Affine()
        self._sense = "min"
        self.eq_tol = eq_tol
        self.inconsistent = []

    def new_vars(self, k):
        idx = np.arange(self.n_vars, self.n_vars + k)
        self.n_vars += k
        return idx

    def scalar(self):
        return Affine.var(int(self.new_vars(1)[0]))

    def symmetric(self, dim):
        """Real symmetric matrix variable."""
        iu = np.triu_indices(dim)
        idx = self.new_vars(len(iu[0]))
        var = np.concatenate([idx, idx[iu[0] != iu[1]]])
        row = np.concatenate([iu[0], iu[1][iu[0] != iu[1]]])
        col = np.concatenate([iu[1], iu[0][iu[0] != iu[1]]])
        return AffineMatrix(dim, None, var, row, col, np.ones(len(var)))

    def hermitian(self, dim, real=False):
        """Hermitian matrix variable; ``real=True`` restricts it to real symmetric."""
        if real:
            return self.symmetric(dim)
        sym = self.symmetric(dim)
        iu = np.triu_indices(dim, 1)
        idx = self.new_vars(len(iu[0]))
        var = np.concatenate([sym.var, idx, idx])
        row = np.concatenate([sym.row, iu[0], iu[1]])
        col = np.concatenate([sym.col, iu[1], iu[0]])
        val = np.concatenate([sym.val, 1j * np.ones(len(idx)), -1j * np.ones(len(idx))])
        return AffineMatrix(dim, None, var, row, col, val)

    def add_eq(self, expr, rhs=0.0, name=""):
        expr = expr - rhs if isinstance(expr, Affine) else Affine(const=float(expr) - rhs)
        if expr.is_constant:
            if abs(expr.const) > self.eq_tol:
                self.inconsistent.append((name, expr.const))
            return
        self._eqs.append(expr)

    def add_matrix_eq(self, mat, name=""):
        """Entrywise ``mat == 0`` for a Hermitian affine matrix (upper triangle)."""
        for i in range(mat.dim):
            for j in range(i, mat.dim):
                self.add_eq(mat.entry(i, j, "real"), name=name)
                if i != j:
                    self.add_eq(mat.entry(i, j, "imag"), name=name)

    def add_psd(self, mat, name=""):
        if not isinstance(mat, AffineMatrix):
            mat = AffineMatrix.constant(mat)
        self._psd.append((mat, name))
        return len(self._psd) - 1

    def add_nonneg(self, expr, name=""):
        mat = AffineMatrix(1, np.array([[expr.const]]), list(expr.coef), [0] * len(expr.coef),
                           [0] * len(expr.coef), list(expr.coef.values()))
        return self.add_psd(mat, name)

    def minimize(self, expr):
        self._objective = expr
        self._sense = "min"

    def maximize(self, expr):
        self._objective = expr
        self._sense = "max"

    def build(self):
        n = self.n_vars
        sign = 1.0 if self._sense == "min" else -1.0
        c = np.zeros(n)
        for v, k in self._objective.coef.items():
            c[v] += sign * k
        A = np.zeros((len(self._eqs), n))
        b = np.zeros(len(self._eqs))
        for r, e in enumerate(self._eqs):
            for v, k in e.coef.items():
                A[r, v] += k
            b[r] = -e.const
        blocks = [_to_block(m, name) for m, name in self._psd]
        return SdpProblem(n, c, A, b, blocks, sign * self._objective.const, self._sense)

    def solve(self, **opts):
        from .ipm import solve

        if self.inconsistent:
            return ModelResult(self, _infeasible_solution(self.n_vars))
        from .dump import maybe_dump

        problem = self.build()
        maybe_dump(problem)
        sol = solve(problem, **opts)
        return ModelResult(self, sol)


def _infeasible_solution(n):
    return SdpSolution(Status.PRIMAL_INFEASIBLE, np.nan, np.full(n, np.nan), np.array([]),
                       np.inf, (np.inf, np.inf))


def embed_hermitian(dim):
    """Descriptor of the real embedding of ``dim × dim`` Hermitian matrices.

    ``H = R + iI`` maps to the real symmetric ``[[R, -I], [I, R]]``. The
    embedding is positive semidefinite exactly when ``H`` is, each eigenvalue
    of ``H`` appears twice, and the trace doubles.
    """
    return HermitianEmbedding(dim)


@dataclass(frozen=True)
class HermitianEmbedding:
    dim: int

    def __call__(self, mat):
        mat = np.asarray(mat)
        re, im = mat.real, mat.imag
        return np.block([[re, -im], [im, re]])

    def recover(self, emb):
        """Inverse map, averaging the redundant copies."""
        d = self.dim
        re = (emb[:d, :d] + emb[d:, d:]) / 2
        im = (emb[d:, :d] - emb[:d, d:]) / 2
        return re + 1j * im

    @property
    def trace_factor(self):
        return 2.0


def _to_block(mat, name):
    d = mat.dim
    if mat.is_complex:
        const = embed_hermitian(d)(mat.const)
        re, im = mat.val.real, mat.val.imag
        var = np.concatenate([mat.var] * 4)
        row = np.concatenate([mat.row, mat.row + d, mat.row + d, mat.row])
        col = np.concatenate([mat.col, mat.col + d, mat.col, mat.col + d])
        val = np.concatenate([re, re, im, -im])
        dim = 2 * d
    else:
        const = mat.const.real
        var, row, col, val = mat.var, mat.row, mat.col, mat.val.real
        dim = d
    keep = val != 0
    var, row, col, val = var[keep], row[keep], col[keep], val[keep]
    uniq, local = np.unique(var, return_inverse=True)
    coeffs = sp.csr_matrix((val, (local, row * dim + col)), shape=(len(uniq), dim * dim))
    coeffs.sum_duplicates()
    const = (const + const.T) / 2
    return LmiBlock(dim, const, uniq, coeffs, name)


class ModelResult:
    """Solution of a :class:`Model`, evaluable on the model's expressions."""

    def __init__(self, model, solution):
        self.model = model
        self.solution = solution
        self.x = solution.primal_point

    @property
    def status(self):
        return self.solution.status

    @property
    def ok(self):
        return self.solution.ok

    @property
    def value(self):
        return self.solution.optimum

    def __getitem__(self, expr):
        return expr.value(self.x)

    def require(self, what="program", loose=1e-6):
        """Return ``self`` if solved; otherwise raise :class:`SolverError`.

        An iterate that stopped on the iteration cap is accepted when its
        relative gap and residuals are all below ``loose``.
        """
        sol = self.solution
        if sol.ok:
            return self
        if sol.status == Status.MAX_ITERATIONS and sol.gap <= loose and max(sol.residuals) <= loose:
            return self
        raise SolverError(f"{what}: solver returned {sol.status.value}", sol)

    def dual(self, k):
        """Dual matrix of PSD constraint ``k`` in the model's own (complex) coordinates."""
        mat, _ = self.model._psd[k]
        z = self.solution.duals[k]
        if mat.is_complex:
            return HermitianEmbedding(mat.dim).recover(z) * 2.0
        return z
