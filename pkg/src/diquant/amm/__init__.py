"""Assemblage moment matrices and the device-independent programs built on them."""

from .di import DiBound, INFEASIBLE, sr_di, sr_di_bell, sr_di_consistent, subchannel_advantage, sw_di
from .template import AmmTemplate, build_template, instantiate_numeric, instantiate_symbolic
from .tripartite import tripartite_amm_feasible
from .words import MAX_LEVEL, MAX_WORDS, OperatorWord, SymbolicMatrix, enumerate_words, reduce_word

__all__ = [
    "DiBound", "INFEASIBLE", "sr_di", "sr_di_bell", "sr_di_consistent", "subchannel_advantage", "sw_di",
    "AmmTemplate", "build_template", "instantiate_numeric", "instantiate_symbolic",
    "tripartite_amm_feasible", "MAX_LEVEL", "MAX_WORDS", "OperatorWord", "SymbolicMatrix", "enumerate_words", "reduce_word",
]
