"""Bell scenarios, states, measurements, correlations and assemblages."""

from .bell import (
    BellFunctional,
    SeesawResult,
    bell_value,
    ch,
    cglmp,
    chsh,
    chsh_variants,
    correlator_functional,
    elegant,
    functional,
    i2233,
    i3322,
    local_bound,
    max_chsh,
    seesaw_optimize,
)
from .objects import (
    Assemblage,
    Correlation,
    MeasurementAssemblage,
    Scenario,
    TripartiteAssemblage,
    ValidationError,
)
from .states import (
    MAX_STRATEGIES,
    assemblage_from_state,
    born_correlation,
    ch_settings,
    chsh_settings,
    deterministic_strategies,
    elegant_settings,
    isotropic_state,
    local_deterministic_correlation,
    maximally_entangled,
    pr_box,
    pr_box_assemblage,
    pure_partially_entangled,
    qubit_measurements,
    qubit_projective,
    tripartite_assemblage_from_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]
