"""Grid computations behind the ``diquant figure`` command.

Each figure is a table with a fixed header and one row per grid point. A row
is computed by a module-level function so grid points can be farmed out to
worker processes; the measurement settings found by see-saw are cached per
process and depend only on the seed.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import amm, entanglement, incompat, npa, steering
from .quantum import (
    assemblage_from_state,
    born_correlation,
    ch_settings,
    chsh_settings,
    elegant_settings,
    i2233,
    i3322,
    isotropic_state,
    pure_partially_entangled,
    seesaw_optimize,
)

SCENARIOS = ("2222", "3322", "4322")
SEESAW_RESTARTS = 10

# default local levels; ``--level`` replaces all of them
LEVELS = {
    "er_di_mblhg": {"2222": 3, "3322": 1, "4322": 2, "2233": 1},
    "sr_di": 2,
    "src_di": 2,
    "nr": 1,
    "er_di_bell": 2,
}


@functools.lru_cache(maxsize=None)
def settings(scenario, seed=1234):
    """Measurements giving the optimal violation of the scenario's inequality on the maximally entangled state."""
    if scenario == "2222":
        return chsh_settings()
    if scenario == "4322":
        return elegant_settings()
    if scenario == "3322":
        res = seesaw_optimize(i3322(), isotropic_state(2, 1.0), restarts=SEESAW_RESTARTS, seed=seed)
    elif scenario == "2233":
        res = seesaw_optimize(i2233(), isotropic_state(3, 1.0), restarts=SEESAW_RESTARTS, seed=seed)
    else:
        raise KeyError(scenario)
    return res.alice, res.bob


def _level(method, scenario, override):
    if override is not None:
        return override
    lv = LEVELS[method]
    return lv[scenario] if isinstance(lv, dict) else lv


def _value(bound):
    return bound.value if bound.feasible else math.nan


def _di_methods(P, scenario, level):
    return {
        "er_di_mblhg": _value(npa.er_di_mblhg(P, _level("er_di_mblhg", scenario, level))),
        "sr_di": _value(amm.sr_di(P, _level("sr_di", scenario, level))),
        "nr": _value(npa.nonlocal_robustness(P, _level("nr", scenario, level))),
    }


def _isotropic_rows(v, scenarios, level, seed, d=2):
    out = {}
    for sc in scenarios:
        A, B = settings(sc, seed)
        P = born_correlation(isotropic_state(d, v), [A, B])
        out[sc] = _di_methods(P, sc, level)
    return out


def row_fig1(v, level=None, seed=1234):
    per = _isotropic_rows(v, SCENARIOS, level, seed)
    best = {k: max(per[sc][k] for sc in SCENARIOS) for k in ("er_di_mblhg", "sr_di", "nr")}
    return [v, best["er_di_mblhg"], best["sr_di"], best["nr"],
            entanglement.er_isotropic_analytic(2, v),
            max(0.0, (math.sqrt(2) * v - 1) / (math.sqrt(2) - 1))]


def row_fig4(v, level=None, seed=1234):
    per = _isotropic_rows(v, SCENARIOS, level, seed)
    row = [v]
    for sc in SCENARIOS:
        row += [per[sc]["er_di_mblhg"], per[sc]["sr_di"], per[sc]["nr"]]
    return row + [entanglement.er_isotropic_analytic(2, v)]


def row_fig2(v, level=None, seed=1234):
    per = _isotropic_rows(v, ("2233",), level, seed, d=3)["2233"]
    er_ppt, _ = entanglement.er_ppt(isotropic_state(3, v), (3, 3))
    return [v, per["er_di_mblhg"], per["sr_di"], per["nr"], er_ppt,
            entanglement.er_isotropic_analytic(3, v)]


def _fig3(theta, level, swap):
    rho = pure_partially_entangled(theta)
    A, B = ch_settings(theta)
    P = born_correlation(rho, [A, B])
    # the state is symmetric under exchange, so Bob's assemblage uses the same formula
    meas = B if swap else A
    if swap:
        P = P.swapped()
    assemblage = assemblage_from_state(rho, meas)
    return [
        theta,
        incompat.incompatibility_robustness(meas).value,
        steering.steering_robustness(assemblage).value,
        steering.consistent_steering_robustness(assemblage).value,
        _value(amm.sr_di_consistent(P, _level("src_di", None, level))),
        _value(amm.sr_di(P, _level("sr_di", None, level))),
        _value(npa.nonlocal_robustness(P, _level("nr", None, level), consistent=True)),
    ]


def row_fig3a(theta, level=None, seed=1234):
    return _fig3(theta, level, swap=False)


def row_fig3b(theta, level=None, seed=1234):
    return _fig3(theta, level, swap=True)


def row_fig5(t, level=None, seed=1234):
    return [t, _value(npa.er_di_bell(i3322(), t, _level("er_di_bell", None, level)))]


@dataclass(frozen=True)
class Figure:
    name: str
    header: tuple
    row: object
    lo: float
    hi: float
    default_grid: int
    include_lo: bool = True

    def grid(self, n):
        """``n`` points ending at ``hi``; ``lo`` itself is skipped when excluded."""
        if n < 1:
            raise ValueError("grid needs at least one point")
        if n == 1:
            return [self.hi]
        if self.include_lo:
            return [float(x) for x in np.linspace(self.lo, self.hi, n)]
        return [float(x) for x in np.linspace(self.lo, self.hi, n + 1)[1:]]


_FIG3_HEADER = ("theta", "ir", "sr", "src", "src_di", "sr_di", "nrc")

FIGURES = {
    "fig1": Figure("fig1", ("v", "er_di_mblhg", "sr_di", "nr", "er_analytic", "er_di_reference"),
                   row_fig1, 0.7, 1.0, 7),
    "fig2": Figure("fig2", ("v", "er_di_mblhg", "sr_di", "nr", "er_ppt", "er_analytic"),
                   row_fig2, 0.65, 1.0, 8),
    "fig3a": Figure("fig3a", _FIG3_HEADER, row_fig3a, 0.0, math.pi / 4, 4, include_lo=False),
    "fig3b": Figure("fig3b", _FIG3_HEADER, row_fig3b, 0.0, math.pi / 4, 4, include_lo=False),
    "fig4": Figure("fig4", ("v",) + tuple(f"{m}_{sc}" for sc in SCENARIOS for m in ("er_di_mblhg", "sr_di", "nr"))
                   + ("er_analytic",), row_fig4, 0.7, 1.0, 7),
    "fig5": Figure("fig5", ("violation", "er_di_bell"), row_fig5, 0.0, 0.25, 6),
}
