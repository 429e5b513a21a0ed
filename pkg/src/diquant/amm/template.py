"""Assemblage moment matrices (AMMs).

For a trusted party holding ``ρ_{a|x}`` and operators ``B_i`` built as words
in the (untrusted) projectors ``E_{b|y}``, the AMM has entries

    χ[ρ_{a|x}]_{ij} = tr(ρ_{a|x} B_j† B_i).

Entries fall into four classes: ``Zero`` (orthogonal projectors meet),
``Normalization`` (the word reduces to 𝟙, value ``P(a|x)``), ``Probability``
(a single projector ``E_{b|y}``, value ``P(a,b|x,y)``) and ``Unknown`` (a real
moment not fixed by the correlation, shared by a word and its reversal).
"""

import json

import numpy as np

from ..quantum import Assemblage, MeasurementAssemblage, Scenario
from .words import MAX_LEVEL, MAX_WORDS, ONE, ZERO, OperatorWord, SymbolicMatrix, enumerate_words

KIND_NAMES = {"0": "Zero", "1": "Normalization", "P": "Probability", "u": "Unknown"}


def product_symbol(word):
    """Symbol of a reduced product word (``None`` is the zero operator)."""
    if word is None:
        return ZERO
    if len(word) == 0:
        return ONE
    if len(word) == 1:
        s, o = word.letters[0]
        return ("P", s, o)
    return ("u", word.canonical().letters)


class AmmTemplate(SymbolicMatrix):
    """Symbolic AMM for ``n_settings`` measurements with ``n_outcomes`` outcomes at level ``ℓ``."""

    def __init__(self, n_settings, n_outcomes, level, cap=MAX_WORDS):
        if level < 1 or level > MAX_LEVEL:
            raise ValueError(f"level must be between 1 and {MAX_LEVEL}")
        self.level = level
        self.n_settings = n_settings
        self.n_outcomes = n_outcomes
        self.words = enumerate_words(n_settings, n_outcomes, level, cap)
        entries = [[product_symbol(wj.dagger() * wi) for wj in self.words] for wi in self.words]
        super().__init__(entries)

    @property
    def unknowns(self):
        return self.symbols_of_kind("u")

    @property
    def n_unknowns(self):
        return len(self.unknowns)

    @property
    def letters(self):
        return [(s, o) for s in range(self.n_settings) for o in range(self.n_outcomes - 1)]

    def kind(self, i, j):
        return KIND_NAMES[self.symbols[self.index[i, j]][0]]

    def to_json(self):
        uid = {s: k for k, s in enumerate(self.unknowns)}
        entries = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                sym = self.symbols[self.index[i, j]]
                cell = {"kind": KIND_NAMES[sym[0]]}
                if sym[0] == "P":
                    cell["setting"], cell["outcome"] = sym[1], sym[2]
                elif sym[0] == "u":
                    cell["id"] = uid[sym]
                row.append(cell)
            entries.append(row)
        return {
            "type": "amm_template",
            "level": self.level,
            "settings": self.n_settings,
            "outcomes": self.n_outcomes,
            "words": [[list(let) for let in w.letters] for w in self.words],
            "entries": entries,
        }

    def dumps(self):
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data):
        t = cls(data["settings"], data["outcomes"], data["level"])
        if t.to_json()["entries"] != data["entries"]:
            raise ValueError("serialised template does not match its reconstruction")
        return t


def build_template(scenario, level, party=1):
    """AMM template for the measurements of ``party`` (Bob by default) in ``scenario``."""
    if isinstance(scenario, Scenario):
        n_s, n_o = scenario.settings[party], scenario.outcomes[party]
    else:
        n_s, n_o = scenario
    return AmmTemplate(n_s, n_o, level)


def word_operator(word, povms):
    """Matrix of a word for a concrete measurement assemblage."""
    d = povms.shape[-1]
    out = np.eye(d, dtype=complex)
    for s, o in word.letters:
        out = out @ povms[o, s]
    return out


def instantiate_numeric(template, A: Assemblage, M: MeasurementAssemblage, check=True):
    """Numeric AMMs ``χ[ρ_{a|x}]`` computed directly from operators.

    Returns an array indexed ``[a, x, i, j]``. Requires projective ``M``
    because the template's reduction rules assume it.
    """
    if check and not M.is_projective(1e-8):
        raise ValueError("instantiate_numeric needs projective measurements")
    if M.n_settings != template.n_settings or M.n_outcomes != template.n_outcomes:
        raise ValueError("measurement assemblage does not match the template")
    ops = [word_operator(w, M.povms) for w in template.words]
    n = template.dim
    out = np.zeros(A.rho.shape[:2] + (n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            prod = ops[j].conj().T @ ops[i]
            out[:, :, i, j] = np.einsum("axkl,lk->ax", A.rho, prod)
    return out


def instantiate_symbolic(template, A: Assemblage, M: MeasurementAssemblage):
    """Same matrices evaluated through the symbol table (for consistency checks)."""
    ops = {}
    for sym in template.symbols[1:]:
        if sym == ONE:
            ops[sym] = np.eye(M.dim)
        elif sym[0] == "P":
            ops[sym] = M.povms[sym[2], sym[1]]
        else:
            ops[sym] = word_operator(OperatorWord(sym[1]), M.povms)
    out = np.zeros(A.rho.shape[:2] + (template.dim, template.dim), dtype=complex)
    for a in range(A.n_outcomes):
        for x in range(A.n_settings):
            rho = A.rho[a, x]
            out[a, x] = template.numeric(lambda s: np.trace(rho @ ops[s]))
    return out
