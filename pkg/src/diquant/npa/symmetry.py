"""Relabeling symmetries and symmetry-adapted moment variables.

A relabeling permutes the inputs of each party and, for every input, its
outcomes. If it leaves a Bell functional (or a correlation table) invariant,
then any feasible moment matrix can be replaced by its group average without
changing the objective, so the moments may be restricted to the invariant
subspace. Because the final outcome is eliminated through completeness, a
relabeling acts on moment symbols linearly rather than as a permutation.
"""

import itertools
import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..amm.words import ONE, ZERO, OperatorWord, enumerate_words, reduce_word
from .template import pair_symbol


def _party_relabelings(n_in, n_out):
    for perm in itertools.permutations(range(n_in)):
        for outs in itertools.product(itertools.permutations(range(n_out)), repeat=n_in):
            yield perm, outs


def _apply(table, g):
    """Relabeled copy of an array indexed ``[a, b, x, y]``."""
    (px, sa), (py, sb) = g
    n_a, n_b, n_x, n_y = table.shape
    out = np.empty_like(table)
    ia = np.array([[sa[x][a] for x in range(n_x)] for a in range(n_a)])
    ib = np.array([[sb[y][b] for y in range(n_y)] for b in range(n_b)])
    a, b, x, y = np.indices(table.shape)
    out[ia[a, x], ib[b, y], np.asarray(px)[x], np.asarray(py)[y]] = table
    return out


def relabeling_symmetries(table, tol=1e-9, limit=200000):
    """All local relabelings ``g`` with ``g·table = table`` for an array ``[a, b, x, y]``.

    Returns a list of ``((perm_x, outs_x), (perm_y, outs_y))`` where
    ``outs_x[x]`` permutes the outcomes of input ``x``. The identity is
    always included. Gives up (returning only the identity) when the number
    of candidates exceeds ``limit``.
    """
    table = np.asarray(table, dtype=float)
    n_a, n_b, n_x, n_y = table.shape
    count = (math.factorial(n_x) * math.factorial(n_a) ** n_x
             * math.factorial(n_y) * math.factorial(n_b) ** n_y)
    ident = ((tuple(range(n_x)), tuple(tuple(range(n_a)) for _ in range(n_x))),
             (tuple(range(n_y)), tuple(tuple(range(n_b)) for _ in range(n_y))))
    if count > limit:
        return [ident]
    out = []
    ga = list(_party_relabelings(n_x, n_a))
    gb = list(_party_relabelings(n_y, n_b))
    for g_a in ga:
        half = _apply(table, (g_a, ident[1]))
        for g_b in gb:
            if np.abs(_apply(half, (ident[0], g_b)) - table).max() <= tol:
                out.append((g_a, g_b))
    return out


def _letter_image(letter, perm, outs, n_out):
    """Image of ``E_{o|s}`` as ``{letter or None (identity): coefficient}``."""
    s, o = letter
    s2, o2 = perm[s], outs[s][o]
    if o2 < n_out - 1:
        return {(s2, o2): 1.0}
    img = {None: 1.0}
    for k in range(n_out - 1):
        img[(s2, k)] = -1.0
    return img


def _word_image(word, perm, outs, n_out):
    terms = {OperatorWord(): 1.0}
    for letter in word.letters:
        img = _letter_image(letter, perm, outs, n_out)
        nxt = {}
        for w, c in terms.items():
            for l2, c2 in img.items():
                prod = w if l2 is None else reduce_word(w.letters + (l2,))
                if prod is None:
                    continue
                nxt[prod] = nxt.get(prod, 0.0) + c * c2
        terms = {w: c for w, c in nxt.items() if c != 0.0}
    return terms


def _representative(sym):
    """Word pair whose reduced product has symbol ``sym``."""
    if sym == ONE:
        return OperatorWord(), OperatorWord()
    if sym[0] == "PA":
        return OperatorWord(((sym[1], sym[2]),)), OperatorWord()
    if sym[0] == "PB":
        return OperatorWord(), OperatorWord(((sym[1], sym[2]),))
    if sym[0] == "PAB":
        return OperatorWord(((sym[1], sym[2]),)), OperatorWord(((sym[3], sym[4]),))
    return OperatorWord(sym[1]), OperatorWord(sym[2])


class _SymbolTable:
    """Lookup ``(A-word, B-word) → symbol position`` over all reduced products of the template."""

    def __init__(self, template):
        n_a, n_b, n_x, n_y = template.shape
        la = max(len(w) for w in template.words_a)
        lb = max(len(w) for w in template.words_b)
        self.words_a = enumerate_words(n_x, n_a, 2 * la, cap=10 ** 7)
        self.words_b = enumerate_words(n_y, n_b, 2 * lb, cap=10 ** 7)
        self.ia = {w: k for k, w in enumerate(self.words_a)}
        self.ib = {w: k for k, w in enumerate(self.words_b)}
        self.syms = template.symbols[1:]
        pos = {sym: k for k, sym in enumerate(self.syms)}
        self.table = np.full((len(self.words_a), len(self.words_b)), -1, dtype=int)
        for i, wa in enumerate(self.words_a):
            for j, wb in enumerate(self.words_b):
                self.table[i, j] = pos.get(pair_symbol(wa, wb), -1)
        reps = [_representative(sym) for sym in self.syms]
        self.rep_a = [wa for wa, _ in reps]
        self.rep_b = [wb for _, wb in reps]
        self.n_a, self.n_b = n_a, n_b

    def image_matrix(self, reps, index, perm, outs, n_out, cache):
        """Sparse ``[symbol, word]`` matrix of the relabeled representative words."""
        rows, cols, vals = [], [], []
        for k, w in enumerate(reps):
            key = (w, perm, outs)
            if key not in cache:
                cache[key] = [(index[u], c) for u, c in _word_image(w, perm, outs, n_out).items()]
            for j, c in cache[key]:
                rows.append(k)
                cols.append(j)
                vals.append(c)
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(reps), len(index)))


def symbol_action(template, g, _table=None, _cache=None):
    """Sparse matrix ``T`` with ``(T m)[s] =`` moment ``s`` of the relabeled realization."""
    tab = _table if _table is not None else _SymbolTable(template)
    cache = _cache if _cache is not None else {}
    (px, sa), (py, sb) = g
    Ma = tab.image_matrix(tab.rep_a, tab.ia, px, sa, tab.n_a, cache)
    Mb = tab.image_matrix(tab.rep_b, tab.ib, py, sb, tab.n_b, cache)
    # all pairs of nonzeros sharing a row
    ca, cb = np.diff(Ma.indptr), np.diff(Mb.indptr)
    reps = ca * cb
    row = np.repeat(np.arange(len(ca)), reps)
    start = np.repeat(np.cumsum(reps) - reps, reps)
    off = np.arange(reps.sum()) - start
    cb_r = np.repeat(cb, reps)
    pa = np.repeat(Ma.indptr[:-1], reps) + off // np.maximum(cb_r, 1)
    pb = np.repeat(Mb.indptr[:-1], reps) + off % np.maximum(cb_r, 1)
    col = tab.table[Ma.indices[pa], Mb.indices[pb]]
    if np.any(col < 0):
        raise KeyError("relabeled symbol outside the template")
    val = Ma.data[pa] * Mb.data[pb]
    n = len(tab.syms)
    T = sp.csr_matrix((val, (row, col)), shape=(n, n))
    T.sum_duplicates()
    T.eliminate_zeros()
    return T


def invariant_basis(template, group, seed=0, dense_limit=6000, dense_entries=5_000_000):
    """Sparse basis ``Q`` (columns) of the moment vectors fixed by every element of ``group``.

    Rows follow ``template.symbols[1:]``. The columns are a linearly
    independent subset of the columns of the group average ``R``, chosen by
    pivoted QR, so each symbol depends on only a few new variables; when
    the moment matrix written densely in the new variables would have at
    most ``dense_entries`` coefficients, ``Q`` is orthonormalised instead and
    returned dense. The rank is ``tr R``. A trivial group, or a template with more than
    ``dense_limit`` symbols, returns ``None`` (no reduction).
    """
    n = len(template.symbols) - 1
    if len(group) <= 1 or n > dense_limit:
        return None
    tab, cache = _SymbolTable(template), {}
    R = sum(symbol_action(template, g, tab, cache) for g in group) / len(group)
    R = sp.csc_matrix(R)
    rank = int(round(R.diagonal().sum()))
    # columns independent in a random row sketch are independent in R
    sketch = (R.T @ np.random.default_rng(seed).standard_normal((n, rank))).T
    _, piv = sla.qr(sketch, mode="r", pivoting=True)
    cols = np.sort(piv[:rank])
    Q = R[:, cols]
    if rank * template.dim ** 2 <= dense_entries:
        # small bases solve faster when orthonormal
        return np.linalg.qr(Q.toarray())[0]
    Q = Q.tocsr()
    Q.eliminate_zeros()
    return Q
