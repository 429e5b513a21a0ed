"""SDPs over the local-level moment-matrix relaxation ``Q̃^(ℓ)`` of the quantum set."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..amm.di import INFEASIBLE, DiBound
from ..amm.words import ONE
from ..quantum import BellFunctional, Correlation
from ..solver import Affine, AffineMatrix, Model, Status, affine_sum
from .symmetry import invariant_basis, relabeling_symmetries
from .template import BipartiteTemplate, deterministic_local, full_table

FEAS_TOL = 1e-7
S_CAP = 1e6


@dataclass
class NpaMembership:
    level: int
    feasible: bool
    moments: np.ndarray
    margin: float
    diagnostics: dict = field(default_factory=dict)


def _correlation(P):
    P = P if isinstance(P, Correlation) else Correlation(P)
    if P.parties != 2:
        raise ValueError("expected a bipartite correlation")
    return P


def _template(P, level):
    n_a, n_b, n_x, n_y = P.shape
    return BipartiteTemplate(n_x, n_a, n_y, n_b, level)


def _moment_matrix(m, t, look, basis=None):
    """Affine moment matrix with ``look(symbol)`` for known entries and variables elsewhere.

    Without ``basis`` every unknown symbol gets a fresh variable. With a
    basis ``Q`` of invariant moment vectors (rows ordered as
    ``t.symbols[1:]``) all symbols are ``Q z`` for fresh ``z`` and the known
    entries become equality constraints.
    """
    if basis is None:
        var = {}

        def entry(sym):
            v = look(sym)
            if v is None:
                if sym not in var:
                    var[sym] = m.scalar()
                return var[sym]
            return v

        return t.affine(entry), entry

    z = m.new_vars(basis.shape[1])
    exprs = {}
    if sp.issparse(basis):
        basis = basis.tocsr()
    else:
        basis = sp.csr_matrix(np.where(np.abs(basis) > 1e-13, basis, 0.0))
    for k, sym in enumerate(t.symbols[1:]):
        lo, hi = basis.indptr[k], basis.indptr[k + 1]
        exprs[sym] = Affine({int(z[j]): float(c) for j, c in zip(basis.indices[lo:hi], basis.data[lo:hi])})
        v = look(sym)
        if v is not None:
            m.add_eq(exprs[sym] - v, name="observed moment")
    return t.affine(exprs.__getitem__), exprs.__getitem__


def _finish(res, level, value_fn, cert_fn, what):
    if res.status == Status.PRIMAL_INFEASIBLE:
        return DiBound(float("nan"), level, INFEASIBLE, {}, res.solution.diagnostics())
    res.require(what)
    return DiBound(float(value_fn(res)), level, "Optimal", cert_fn(res), res.solution.diagnostics())


def q_membership(P, level=1):
    """Test ``P ∈ Q̃^(ℓ)`` by ``max t`` s.t. ``χ - t𝟙 ⪰ 0`` with the observed entries fixed.

    ``feasible`` holds when ``t* ≥ -1e-7``; a negative margin certifies that
    ``P`` has no quantum realization.
    """
    P = _correlation(P)
    t = _template(P, level)
    m = Model()
    chi, _ = _moment_matrix(m, t, t.lookup_from(P))
    s = m.scalar()
    m.add_psd(chi - AffineMatrix.scaled(s, np.eye(t.dim)))
    m.add_nonneg(1.0 - s)
    m.maximize(s)
    res = m.solve().require("moment-matrix membership")
    margin = float(res.value)
    return NpaMembership(level, margin >= -FEAS_TOL, chi.value(res.x).real, margin,
                         res.solution.diagnostics())


def _local_mixture(D, pi, a, b, x, y):
    return affine_sum(pi[k] for k in np.flatnonzero(D[:, a, b, x, y]))


def nonlocal_robustness(P, level=1, consistent=False, form="bounded"):
    """Lower bound on the nonlocal robustness with the noise relaxed to ``Q̃^(ℓ)``.

    ``form="bounded"`` solves ``min Σπ - 1`` over ``π ≥ 0`` such that
    ``Σ_λ π_λ D_λ - P`` is an unnormalised element of ``Q̃^(ℓ)`` with weight
    ``Σπ - 1``. ``form="max-s"`` solves ``max s`` s.t. ``Σ_λ q_λ D_λ - sP ∈ Q̃^(ℓ)``,
    ``Σq - s = 1``, ``q ≥ 0`` and returns ``1/s*``; ``s`` is capped at
    ``1e6`` and a capped optimum is reported as 0. ``consistent`` adds
    ``Σ_λ D(b|y,λ) π_λ = P(b|y) Σ_λ π_λ``.
    """
    P = _correlation(P)
    n_a, n_b, n_x, n_y = P.shape
    t = _template(P, level)
    D = deterministic_local(n_a, n_b, n_x, n_y)
    m = Model()
    pi = [m.scalar() for _ in range(len(D))]
    for p in pi:
        m.add_nonneg(p)
    total = affine_sum(pi)
    ma, mb = P.marginal_a(), P.marginal_b()
    if form == "bounded":
        scale, norm = 1.0, total - 1.0
    elif form == "max-s":
        s = m.scalar()
        m.add_nonneg(S_CAP - s)
        m.add_eq(total - s, 1.0, name="normalisation")
        scale, norm = s, 1.0
    else:
        raise ValueError(f"unknown form {form!r}")
    dA = D.sum(axis=2)[:, :, :, 0]  # [λ, a, x]
    dB = D.sum(axis=1)[:, :, 0, :]  # [λ, b, y]

    def look(sym):
        if sym == ONE:
            return norm
        if sym[0] == "PA":
            _, x, a = sym
            return affine_sum(pi[k] for k in np.flatnonzero(dA[:, a, x])) - scale * ma[a, x]
        if sym[0] == "PB":
            _, y, b = sym
            return affine_sum(pi[k] for k in np.flatnonzero(dB[:, b, y])) - scale * mb[b, y]
        if sym[0] == "PAB":
            _, x, a, y, b = sym
            return _local_mixture(D, pi, a, b, x, y) - scale * P.table[a, b, x, y]
        return None

    chi, _ = _moment_matrix(m, t, look)
    m.add_psd(chi)
    if consistent:
        for y in range(n_y):
            for b in range(n_b - 1):
                lhs = affine_sum(pi[k] for k in np.flatnonzero(dB[:, b, y]))
                m.add_eq(lhs - total * mb[b, y], name="consistent")
    name = "consistent nonlocal robustness" if consistent else "nonlocal robustness"
    if form == "bounded":
        m.minimize(total - 1.0)
        res = m.solve()
        value = lambda r: max(r.value, 0.0)
    else:
        m.maximize(s)
        res = m.solve()
        value = lambda r: 0.0 if r.value >= S_CAP * (1 - 1e-6) else 1.0 / max(r.value, 1e-300)

    def cert(r):
        return {"weights": np.array([p.value(r.x) for p in pi]), "noise_moments": chi.value(r.x).real}

    return _finish(res, level, value, cert, name)


def _er_program(m, t, look, basis=None):
    """``χ[ρ] ⪰ 0``, ``χ[ω] ⪰ χ[ρ]``, ``χ[ω]^{T_A} ⪰ 0``; returns ``(χ[ρ], χ[ω], ρ-lookup)``."""
    rho, rho_look = _moment_matrix(m, t, look, basis)
    omega, _ = _moment_matrix(m, t, lambda s: None, basis)
    m.add_psd(rho)
    m.add_psd(omega - rho)
    m.add_psd(omega.remap(t.partial_transpose_map(), t.dim))
    m.minimize(omega.entry(0, 0) - 1.0)
    return rho, omega, rho_look


def er_di_mblhg(P, level=1, symmetrize=True):
    """DI lower bound on the generalized robustness of entanglement of any state realizing ``P``.

    ``min χ[ω]_tr - 1`` s.t. ``χ[ω]^{T_A} ⪰ 0``, ``χ[ω] ⪰ χ[ρ] ⪰ 0`` with the
    observed probabilities fixed in ``χ[ρ]``. With ``symmetrize`` the moments
    are restricted to those invariant under the local relabelings that leave
    ``P`` unchanged, which loses nothing by convexity.
    """
    P = _correlation(P)
    t = _template(P, level)
    basis = invariant_basis(t, relabeling_symmetries(P.table)) if symmetrize else None
    m = Model()
    rho, omega, _ = _er_program(m, t, t.lookup_from(P), basis)
    res = m.solve()
    cert = lambda r: {"rho": rho.value(r.x).real, "omega": omega.value(r.x).real}
    return _finish(res, level, lambda r: max(r.value, 0.0), cert, "DI entanglement robustness")


def er_di_bell(f: BellFunctional, observed, level=1, symmetrize=True):
    """DI entanglement-robustness bound given only the value of a Bell functional.

    The probabilities in ``χ[ρ]`` are free apart from ``Σ β P = observed``;
    an observed value outside the level-ℓ quantum range yields an infeasible
    status. ``symmetrize`` restricts to moments invariant under the
    relabelings that leave ``f`` unchanged.
    """
    n_a, n_b, n_x, n_y = f.coeffs.shape
    lo, hi = f.algebraic_range()
    if not lo - 1e-9 <= observed <= hi + 1e-9:
        raise ValueError(f"observed value {observed} outside the algebraic range [{lo}, {hi}]")
    t = BipartiteTemplate(n_x, n_a, n_y, n_b, level)
    basis = invariant_basis(t, relabeling_symmetries(f.coeffs)) if symmetrize else None
    m = Model()
    prob = {}

    def look(sym):
        if sym == ONE:
            return 1.0
        if basis is None and sym[0] in ("PA", "PB", "PAB"):
            if sym not in prob:
                prob[sym] = m.scalar()
            return prob[sym]
        return None

    rho, omega, rho_look = _er_program(m, t, look, basis)
    table = full_table(n_a, n_b, n_x, n_y, lambda s: 1.0 if s == ONE else rho_look(s))
    value = affine_sum(f.coeffs[a, b, x, y] * table[a][b][x][y]
                       for a in range(n_a) for b in range(n_b) for x in range(n_x) for y in range(n_y)
                       if f.coeffs[a, b, x, y] != 0)
    m.add_eq(value, observed, name="bell value")
    res = m.solve()

    def cert(r):
        tab = np.array([[[[_val(table[a][b][x][y], r.x) for y in range(n_y)] for x in range(n_x)]
                         for b in range(n_b)] for a in range(n_a)])
        return {"correlation": tab, "omega": omega.value(r.x).real}

    return _finish(res, level, lambda r: max(r.value, 0.0), cert, "DI entanglement robustness from a Bell value")


def _val(expr, x):
    return expr.value(x) if hasattr(expr, "value") else float(expr)
