"""Bipartite moment-matrix relaxations of the quantum set and the DI bounds built on them."""

from .programs import NpaMembership, er_di_bell, er_di_mblhg, nonlocal_robustness, q_membership
from .template import BipartiteTemplate, deterministic_local, full_table, pair_symbol

__all__ = [
    "NpaMembership", "er_di_bell", "er_di_mblhg", "nonlocal_robustness", "q_membership",
    "BipartiteTemplate", "deterministic_local", "full_table", "pair_symbol",
]
