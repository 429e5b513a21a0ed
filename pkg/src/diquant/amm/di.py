"""Device-independent bounds from assemblage moment matrices.

Alice is untrusted and only her deterministic response functions enter; the
trusted side of the steering programs is replaced by its AMMs with respect to
words in Bob's projectors. Every moment matrix here is real symmetric because
the unknown moments are taken real.

For each ``(a, x)`` the AMM ``χ_{a|x}`` has its Normalization entries fixed to
``P(a|x)``, its Probability entries to ``P(a,b|x,y)`` and free unknowns
subject to the no-signalling consistency ``Σ_a χ_{a|x}`` independent of
``x``. Each hidden state ``λ`` has an AMM ``χ_λ`` with free trace ``t_λ``,
free probabilities and free unknowns.
"""

from dataclasses import dataclass, field

import numpy as np

from ..quantum import BellFunctional, Correlation, Scenario, deterministic_strategies
from ..solver import AffineMatrix, Model, Status, affine_sum
from .template import AmmTemplate

INFEASIBLE = "Infeasible"


@dataclass
class DiBound:
    """Result of a device-independent program.

    ``status`` is ``"Optimal"`` or ``"Infeasible"``; the latter certifies
    that the data lie outside the level-ℓ relaxation, and ``value`` is NaN.
    """

    value: float
    level: int
    status: str
    certificate: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return self.status != INFEASIBLE


def _finish(res, level, value_fn, certificate_fn, what):
    if res.status == Status.PRIMAL_INFEASIBLE:
        return DiBound(float("nan"), level, INFEASIBLE, {}, res.solution.diagnostics())
    res.require(what)
    return DiBound(float(value_fn(res)), level, "Optimal", certificate_fn(res), res.solution.diagnostics())


class _AmmProgram:
    """Shared construction of the observed and hidden-state AMMs."""

    def __init__(self, level, n_x, n_a, n_y, n_b):
        self.m = Model()
        self.level = level
        self.n_x, self.n_a = n_x, n_a
        self.template = AmmTemplate(n_y, n_b, level)
        self.D = deterministic_strategies(n_x, n_a)

    def observed(self, marg_a, joint):
        """AMMs ``χ_{a|x}`` with Normalization ``marg_a[a][x]`` and Probability ``joint[a][x][y][b]``.

        Entries of ``marg_a``/``joint`` may be numbers or affine expressions.
        Unknowns are fresh variables constrained by no-signalling consistency.
        """
        m, t = self.m, self.template
        unk = t.unknowns
        u = {}
        chi = {}
        for a in range(self.n_a):
            for x in range(self.n_x):
                for s in unk:
                    u[a, x, s] = m.scalar()

                def look(sym, a=a, x=x):
                    if sym[0] == "1":
                        return marg_a[a][x]
                    if sym[0] == "P":
                        return joint[a][x][sym[1]][sym[2]]
                    return u[a, x, sym]

                chi[a, x] = t.affine(look)
        for s in unk:
            ref = affine_sum(u[a, 0, s] for a in range(self.n_a))
            for x in range(1, self.n_x):
                m.add_eq(affine_sum(u[a, x, s] for a in range(self.n_a)) - ref, name="consistency")
        self.u = u
        return chi

    def hidden(self):
        """AMMs ``χ_λ`` with every symbol a fresh variable, and their traces."""
        t = self.template
        chis, traces, probs = [], [], []
        for _ in range(len(self.D)):
            var = {s: self.m.scalar() for s in t.symbols[1:]}
            chis.append(t.affine(var.__getitem__))
            traces.append(var[("1",)])
            probs.append({s: v for s, v in var.items() if s[0] == "P"})
        self.chi_lam, self.t_lam, self.p_lam = chis, traces, probs
        return chis, traces

    def mixture(self, a, x):
        out = AffineMatrix(self.template.dim)
        for lam in np.flatnonzero(self.D[:, a, x]):
            out = out + self.chi_lam[lam]
        return out

    def consistent(self, s, marg_b):
        """``Σ_λ [χ_λ]_P(b|y) = s · P(b|y)`` for every Probability symbol."""
        for sym in self.template.symbols_of_kind("P"):
            total = affine_sum(p[sym] for p in self.p_lam)
            self.m.add_eq(total - s * marg_b(sym[1], sym[2]), name="consistent")

    def certificate(self, res, chi_obs):
        return {
            "hidden": [c.value(res.x).real for c in self.chi_lam],
            "observed": {f"{a},{x}": c.value(res.x).real.tolist() for (a, x), c in chi_obs.items()},
        }


def _tables(P):
    P = P if isinstance(P, Correlation) else Correlation(P)
    if P.parties != 2:
        raise ValueError("expected a bipartite correlation")
    n_a, n_b, n_x, n_y = P.shape
    marg_a = P.marginal_a()
    joint = P.table.transpose(0, 2, 3, 1)  # [a, x, y, b]
    return P, (n_a, n_b, n_x, n_y), marg_a, joint


def _lhs_program(P, level, consistent, direction):
    P, (n_a, n_b, n_x, n_y), marg_a, joint = _tables(P)
    prog = _AmmProgram(level, n_x, n_a, n_y, n_b)
    chi = prog.observed(marg_a, joint)
    prog.hidden()
    m = prog.m
    for c in prog.chi_lam:
        m.add_psd(c)
    for (a, x), c in chi.items():
        m.add_psd(c)
        if direction > 0:
            m.add_psd(prog.mixture(a, x) - c)
        else:
            m.add_psd(c - prog.mixture(a, x))
    s = affine_sum(prog.t_lam)
    if consistent:
        mb = P.marginal_b()
        prog.consistent(s, lambda y, b: mb[b, y])
    return prog, chi, s


def sr_di(P, level=1, consistent=False):
    """DI lower bound on the steering robustness of any assemblage reproducing ``P``.

    ``min Σ_λ t_λ - 1`` s.t. ``Σ_λ D(a|x,λ) χ_λ ⪰ χ_{a|x}``, ``χ_λ ⪰ 0``,
    ``χ_{a|x} ⪰ 0`` with the observed entries fixed. With ``consistent=True``
    the linearised consistency equalities of :func:`sr_di_consistent` are added.
    """
    prog, chi, s = _lhs_program(P, level, consistent, +1)
    prog.m.minimize(s - 1.0)
    res = prog.m.solve()
    name = "consistent DI steering robustness" if consistent else "DI steering robustness"
    return _finish(res, level, lambda r: max(r.value, 0.0), lambda r: prog.certificate(r, chi), name)


def sr_di_consistent(P, level=1):
    """DI lower bound on the consistent steering robustness.

    The consistency ``Σ_λ σ̃_λ = s ρ_B`` passes through the AMM map to
    ``Σ_λ χ_λ = s Σ_a χ_{a|x}``; only the entries where the right-hand side is
    known (Normalization and Probability) are kept, which are linear in the
    moments and ``s = Σ_λ t_λ``.
    """
    return sr_di(P, level, consistent=True)


def sw_di(P, level=1, consistent=False):
    """DI lower bound on the steerable weight: ``1 - max Σ_λ t_λ`` s.t. ``χ_{a|x} ⪰ Σ_λ D χ_λ``."""
    prog, chi, s = _lhs_program(P, level, consistent, -1)
    prog.m.maximize(s)
    res = prog.m.solve()
    return _finish(res, level, lambda r: min(max(1.0 - r.value, 0.0), 1.0),
                   lambda r: prog.certificate(r, chi), "DI steerable weight")


def _cg_variables(m, n_a, n_b, n_x, n_y):
    """Free marginals ``P(a|x)`` and joints ``P(a,b|x,y)`` for ``b < n_b - 1``."""
    marg = [[m.scalar() for _ in range(n_x)] for _ in range(n_a)]
    joint = [[[[m.scalar() for _ in range(n_b - 1)] + [None] for _ in range(n_y)] for _ in range(n_x)]
             for _ in range(n_a)]
    for a in range(n_a):
        for x in range(n_x):
            for y in range(n_y):
                joint[a][x][y][n_b - 1] = marg[a][x] - affine_sum(joint[a][x][y][:n_b - 1])
    return marg, joint


def sr_di_bell(f: BellFunctional, observed, scenario=None, level=1):
    """DI steering-robustness bound from the value of a Bell functional only.

    The correlation is a variable constrained by ``Σ β P = observed``, by
    ``Σ_a P(a|x) = 1`` for every ``x`` and by no-signalling of the AMMs.
    """
    n_a, n_b, n_x, n_y = f.coeffs.shape
    if scenario is not None and scenario != Scenario.bipartite(n_x, n_y, n_a, n_b):
        raise ValueError("scenario does not match the Bell functional")
    lo, hi = f.algebraic_range()
    if not lo - 1e-9 <= observed <= hi + 1e-9:
        raise ValueError(f"observed value {observed} outside the algebraic range [{lo}, {hi}]")
    prog = _AmmProgram(level, n_x, n_a, n_y, n_b)
    m = prog.m
    marg, joint = _cg_variables(m, n_a, n_b, n_x, n_y)
    chi = prog.observed(marg, joint)
    prog.hidden()
    for x in range(n_x):
        m.add_eq(affine_sum(marg[a][x] for a in range(n_a)), 1.0, name="normalisation")
    for y in range(n_y):
        for b in range(n_b - 1):
            ref = affine_sum(joint[a][0][y][b] for a in range(n_a))
            for x in range(1, n_x):
                m.add_eq(affine_sum(joint[a][x][y][b] for a in range(n_a)) - ref, name="no-signalling")
    for a in range(n_a):
        for x in range(n_x):
            for y in range(n_y):
                m.add_nonneg(joint[a][x][y][n_b - 1])
    value = affine_sum(f.coeffs[a, b, x, y] * joint[a][x][y][b]
                       for a in range(n_a) for b in range(n_b) for x in range(n_x) for y in range(n_y)
                       if f.coeffs[a, b, x, y] != 0)
    m.add_eq(value, observed, name="bell value")
    for c in prog.chi_lam:
        m.add_psd(c)
    for (a, x), c in chi.items():
        m.add_psd(c)
        m.add_psd(prog.mixture(a, x) - c)
    m.minimize(affine_sum(prog.t_lam) - 1.0)
    res = m.solve()

    def cert(r):
        c = prog.certificate(r, chi)
        c["correlation"] = [[[[joint[a][x][y][b].value(r.x) for y in range(n_y)] for x in range(n_x)]
                             for b in range(n_b)] for a in range(n_a)]
        return c

    return _finish(res, level, lambda r: max(r.value, 0.0), cert, "DI steering robustness from a Bell value")


def subchannel_advantage(P, level=1):
    """Certified lower bound ``SR_DI + 1`` on the subchannel-discrimination advantage ratio."""
    bound = sr_di(P, level)
    return bound.value + 1.0, bound
