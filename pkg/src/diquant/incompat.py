"""Measurement incompatibility: joint measurability, robustness and weight.

A parent POVM ``{G_λ}`` is indexed by the deterministic strategies
``λ = (λ_0, ..., λ_{n_x-1})``; it reproduces ``{E_{a|x}}`` when
``E_{a|x} = Σ_λ D(a|x,λ) G_λ``.
"""

from dataclasses import dataclass, field

import numpy as np

from .quantum import MeasurementAssemblage, deterministic_strategies
from .solver import AffineMatrix, Model, affine_sum

FEAS_TOL = 1e-7


@dataclass
class IncompatResult:
    value: float
    parent: list
    diagnostics: dict
    extra: dict = field(default_factory=dict)


def _check(M):
    if not isinstance(M, MeasurementAssemblage):
        M = MeasurementAssemblage(M)
    if M.povms.shape[2] != M.povms.shape[3]:
        raise ValueError("POVM elements must be square")
    return M


def _is_real(M):
    return bool(np.all(np.abs(M.povms.imag) < 1e-14))


def _parent(m, M):
    D = deterministic_strategies(M.n_settings, M.n_outcomes)
    G = [m.hermitian(M.dim, real=_is_real(M)) for _ in range(len(D))]
    return D, G


def _mixture(D, G, a, x, dim):
    out = AffineMatrix(dim)
    for lam in np.flatnonzero(D[:, a, x]):
        out = out + G[lam]
    return out


def _total(G, dim):
    out = AffineMatrix(dim)
    for g in G:
        out = out + g
    return out


def is_jointly_measurable(M):
    """Decide joint measurability by ``max t`` s.t. ``G_λ ⪰ t𝟙`` and exact marginals.

    Returns ``(flag, parent)``; ``parent`` is ``None`` when not jointly measurable.
    """
    M = _check(M)
    m = Model()
    D, G = _parent(m, M)
    t = m.scalar()
    eye = np.eye(M.dim)
    for g in G:
        m.add_psd(g - AffineMatrix.scaled(t, eye))
    for x in range(M.n_settings):
        for a in range(M.n_outcomes):
            m.add_matrix_eq(_mixture(D, G, a, x, M.dim) - M.povms[a, x])
    m.maximize(t)
    res = m.solve()
    if res.ok:
        ok = res[t] >= -FEAS_TOL
        return ok, ([g.value(res.x) for g in G] if ok else None)
    ir = incompatibility_robustness(M)
    if ir.value <= FEAS_TOL:
        return True, ir.parent
    return False, None


def incompatibility_robustness(M):
    """``IR = min (1/d) Σ_λ tr G̃_λ - 1`` s.t. ``Σ_λ D(a|x,λ) G̃_λ ⪰ E_{a|x}``.

    The parent satisfies ``Σ_λ G̃_λ = s 𝟙`` with ``s = (1/d) Σ_λ tr G̃_λ``;
    the optimum ``s*`` is reported and the value is ``s* - 1``.
    """
    M = _check(M)
    m = Model()
    D, G = _parent(m, M)
    s = m.scalar()
    for g in G:
        m.add_psd(g)
    for x in range(M.n_settings):
        for a in range(M.n_outcomes):
            m.add_psd(_mixture(D, G, a, x, M.dim) - M.povms[a, x])
    m.add_matrix_eq(_total(G, M.dim) - AffineMatrix.scaled(s, np.eye(M.dim)))
    m.minimize(s - 1.0)
    res = m.solve().require("incompatibility robustness")
    return IncompatResult(max(res.value, 0.0), [g.value(res.x) for g in G],
                          res.solution.diagnostics(), {"raw_value": res.value})


def incompatibility_weight(M):
    """``IW = 1 - max s`` s.t. ``E_{a|x} ⪰ Σ_λ D(a|x,λ) G_λ``, ``G_λ ⪰ 0``, ``Σ_λ G_λ = s𝟙``.

    The optimal split is ``E_{a|x} = s J_{a|x} + (1-s) N_{a|x}`` with
    ``J_{a|x} = Σ_λ D(a|x,λ) G_λ / s`` jointly measurable and ``N`` a valid
    POVM, because the slack ``E_{a|x} - Σ_λ D G_λ`` is positive and sums to
    ``(1-s)𝟙``. This mirrors the steerable-weight program with the extra
    proportionality constraint that makes the parent a rescaled POVM.
    """
    M = _check(M)
    m = Model()
    D, G = _parent(m, M)
    s = m.scalar()
    for g in G:
        m.add_psd(g)
    for x in range(M.n_settings):
        for a in range(M.n_outcomes):
            m.add_psd(-_mixture(D, G, a, x, M.dim) + M.povms[a, x])
    m.add_matrix_eq(_total(G, M.dim) - AffineMatrix.scaled(s, np.eye(M.dim)))
    m.maximize(s)
    res = m.solve().require("incompatibility weight")
    value = min(max(1.0 - res.value, 0.0), 1.0)
    return IncompatResult(value, [g.value(res.x) for g in G], res.solution.diagnostics(),
                          {"raw_value": 1.0 - res.value, "trace_weight": affine_sum(g.trace() for g in G).value(res.x) / M.dim})
