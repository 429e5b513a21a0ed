"""Bipartite moment matrices at local level ℓ.

Rows and columns are indexed by pairs ``(i, j)`` of an A-word ``A_i`` and a
B-word ``B_j``, each of length at most ℓ, flattened as ``i * n_B + j``. Entry
``((i, j), (k, l))`` is the moment ``⟨A_k† A_i ⊗ B_l† B_j⟩``. Symbols:

``("1",)``
    the identity (trace or normalization);
``("PA", x, a)``, ``("PB", y, b)``, ``("PAB", x, a, y, b)``
    marginal and joint probabilities with non-final outcomes;
``("u", α, β)``
    a real unknown shared by ``(α, β)`` and the jointly reversed pair.
"""

import numpy as np

from ..amm.words import MAX_LEVEL, MAX_WORDS, ONE, ZERO, SymbolicMatrix, enumerate_words


def pair_symbol(wa, wb):
    """Symbol of the reduced product pair ``(wa, wb)`` (``None`` is zero)."""
    if wa is None or wb is None:
        return ZERO
    la, lb = len(wa), len(wb)
    if la == 0 and lb == 0:
        return ONE
    if la <= 1 and lb <= 1:
        if lb == 0:
            x, a = wa.letters[0]
            return ("PA", x, a)
        if la == 0:
            y, b = wb.letters[0]
            return ("PB", y, b)
        (x, a), (y, b) = wa.letters[0], wb.letters[0]
        return ("PAB", x, a, y, b)
    key = min((wa.letters, wb.letters), (wa.letters[::-1], wb.letters[::-1]))
    return ("u",) + key


class BipartiteTemplate(SymbolicMatrix):
    """Symbolic moment matrix for ``(n_x, n_a)`` on A and ``(n_y, n_b)`` on B at local level ℓ."""

    def __init__(self, n_x, n_a, n_y, n_b, level, cap=MAX_WORDS):
        lev_a, lev_b = (level, level) if np.isscalar(level) else tuple(level)
        for lv in (lev_a, lev_b):
            if lv < 1 or lv > MAX_LEVEL:
                raise ValueError(f"level must be between 1 and {MAX_LEVEL}")
        self.level = level
        self.shape = (n_a, n_b, n_x, n_y)
        self.words_a = enumerate_words(n_x, n_a, lev_a, cap)
        self.words_b = enumerate_words(n_y, n_b, lev_b, cap)
        na, nb = len(self.words_a), len(self.words_b)
        if na * nb > cap:
            raise OverflowError(f"{na * nb} word pairs exceed the cap {cap}")
        self.n_b_words = nb
        pa = [[wk.dagger() * wi for wk in self.words_a] for wi in self.words_a]
        pb = [[wl.dagger() * wj for wl in self.words_b] for wj in self.words_b]
        pairs = [(i, j) for i in range(na) for j in range(nb)]
        entries = [[pair_symbol(pa[i][k], pb[j][l]) for (k, l) in pairs] for (i, j) in pairs]
        super().__init__(entries)
        self.pairs = pairs

    @property
    def unknowns(self):
        return self.symbols_of_kind("u")

    def partial_transpose_map(self):
        """Index map of the partial transpose on A: ``((i, j), (k, l)) → ((k, j), (i, l))``."""
        nb = self.n_b_words
        out = {}
        for r, (i, j) in enumerate(self.pairs):
            for c, (k, l) in enumerate(self.pairs):
                out[(r, c)] = (k * nb + j, i * nb + l)
        return out

    def lookup_from(self, P):
        """Numeric value of a probability symbol for a correlation ``P`` (``None`` otherwise)."""
        ma, mb = P.marginal_a(), P.marginal_b()

        def look(sym):
            if sym == ONE:
                return 1.0
            if sym[0] == "PA":
                return ma[sym[2], sym[1]]
            if sym[0] == "PB":
                return mb[sym[2], sym[1]]
            if sym[0] == "PAB":
                _, x, a, y, b = sym
                return P.table[a, b, x, y]
            return None

        return look


def full_table(n_a, n_b, n_x, n_y, look):
    """All ``P(a,b|x,y)`` from Collins-Gisin entries ``look(symbol)`` (numbers or affine).

    Returns a nested list indexed ``[a][b][x][y]``.
    """
    out = [[[[None] * n_y for _ in range(n_x)] for _ in range(n_b)] for _ in range(n_a)]
    for x in range(n_x):
        for y in range(n_y):
            for a in range(n_a - 1):
                for b in range(n_b - 1):
                    out[a][b][x][y] = look(("PAB", x, a, y, b))
                out[a][n_b - 1][x][y] = look(("PA", x, a)) - _sum(out[a][b][x][y] for b in range(n_b - 1))
            for b in range(n_b):
                col = look(("PB", y, b)) if b < n_b - 1 else \
                    look(("1",)) - _sum(look(("PB", y, bb)) for bb in range(n_b - 1))
                out[n_a - 1][b][x][y] = col - _sum(out[a][b][x][y] for a in range(n_a - 1))
    return out


def _sum(items):
    items = list(items)
    if not items:
        return 0.0
    total = items[0]
    for it in items[1:]:
        total = total + it
    return total


def deterministic_local(n_a, n_b, n_x, n_y):
    """Local deterministic boxes as an array ``[λ, a, b, x, y]`` with ``λ = (λ_A, λ_B)``."""
    from ..quantum import deterministic_strategies
    da = deterministic_strategies(n_x, n_a)
    db = deterministic_strategies(n_y, n_b)
    return np.einsum("iax,jby->ijabxy", da, db).reshape(-1, n_a, n_b, n_x, n_y)
