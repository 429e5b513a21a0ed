"""Operator words over projective measurement symbols and symbolic moment matrices.

A letter ``(s, o)`` stands for the projector ``E_{o|s}`` of setting ``s`` and
outcome ``o``; only outcomes ``o < n_outcomes - 1`` are used, the last one
being eliminated through completeness. Products are reduced with the
projective rules: adjacent letters of equal setting collapse to one letter
when their outcomes agree (idempotence) and to zero when they differ
(orthogonality). A reduced word therefore never has two adjacent letters with
the same setting.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from ..solver import Affine, AffineMatrix

MAX_WORDS = 256
MAX_LEVEL = 5

ZERO = ("0",)
ONE = ("1",)


@dataclass(frozen=True, order=True)
class OperatorWord:
    letters: tuple = ()

    def __len__(self):
        return len(self.letters)

    def dagger(self):
        return OperatorWord(self.letters[::-1])

    def __mul__(self, other):
        """Reduced product; ``None`` stands for the zero operator."""
        return reduce_word(self.letters + other.letters)

    def canonical(self):
        """Representative shared by a word and its reversal (real moments)."""
        return min(self, self.dagger())

    def __str__(self):
        if not self.letters:
            return "1"
        return "".join(f"E[{o}|{s}]" for s, o in self.letters)


def reduce_word(letters):
    out = []
    for s, o in letters:
        if out and out[-1][0] == s:
            if out[-1][1] != o:
                return None
            continue
        out.append((s, o))
    return OperatorWord(tuple(out))


def enumerate_words(n_settings, n_outcomes, level, cap=MAX_WORDS):
    """All reduced words of length ``≤ level``, ordered by length then lexicographically."""
    if level < 0:
        raise ValueError("level must be non-negative")
    letters = [(s, o) for s in range(n_settings) for o in range(n_outcomes - 1)]
    words = [OperatorWord()]
    frontier = [OperatorWord()]
    for _ in range(level):
        nxt = []
        for w in frontier:
            for let in letters:
                if w.letters and w.letters[-1][0] == let[0]:
                    continue
                nxt.append(OperatorWord(w.letters + (let,)))
        words.extend(nxt)
        frontier = nxt
        if len(words) > cap:
            raise OverflowError(f"{len(words)} words exceed the cap {cap}")
    return words


class SymbolicMatrix:
    """Square matrix whose entries are drawn from a finite table of symbols.

    ``index[i, j]`` points into ``symbols``; the symbol ``ZERO`` always sits at
    position 0. Evaluating the matrix only requires a value (number or
    :class:`~diquant.solver.Affine`) per distinct symbol.
    """

    def __init__(self, entry_symbols):
        n = len(entry_symbols)
        self.dim = n
        self.symbols = [ZERO]
        pos = {ZERO: 0}
        self.index = np.zeros((n, n), dtype=int)
        for i, j in itertools.product(range(n), repeat=2):
            sym = entry_symbols[i][j]
            if sym not in pos:
                pos[sym] = len(self.symbols)
                self.symbols.append(sym)
            self.index[i, j] = pos[sym]
        self.position = pos

    def symbols_of_kind(self, kind):
        return [s for s in self.symbols if s[0] == kind]

    def numeric(self, lookup):
        vals = np.array([0.0] + [complex(lookup(s)) for s in self.symbols[1:]])
        return vals[self.index]

    def _positions(self):
        if not hasattr(self, "_pos_cache"):
            flat = self.index.ravel()
            order = np.argsort(flat, kind="stable")
            bounds = np.searchsorted(flat[order], np.arange(len(self.symbols) + 1))
            self._pos_cache = (order, bounds)
        return self._pos_cache

    def affine(self, lookup):
        """Affine matrix with entry ``(i, j)`` equal to ``lookup(symbol)``."""
        exprs = [Affine()] + [_as_affine(lookup(s)) for s in self.symbols[1:]]
        const = np.array([e.const for e in exprs])[self.index]
        order, bounds = self._positions()
        var, flat, val = [], [], []
        for k, e in enumerate(exprs):
            if not e.coef:
                continue
            pos = order[bounds[k]:bounds[k + 1]]
            vs = np.fromiter(e.coef.keys(), dtype=int, count=len(e.coef))
            cs = np.fromiter(e.coef.values(), dtype=float, count=len(e.coef))
            var.append(np.repeat(vs, len(pos)))
            flat.append(np.tile(pos, len(vs)))
            val.append(np.repeat(cs, len(pos)))
        if not var:
            return AffineMatrix(self.dim, const)
        flat = np.concatenate(flat)
        return AffineMatrix(self.dim, const, np.concatenate(var), flat // self.dim,
                            flat % self.dim, np.concatenate(val))


def _as_affine(x):
    return x if isinstance(x, Affine) else Affine(const=float(x))
