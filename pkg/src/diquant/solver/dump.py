"""Plain-text dump of an :class:`SdpProblem` for cross-checking with other solvers.

Format, one record per line, indices 0-based, ``#`` starts a comment::

    sdp 1                       format version
    vars N                      number of free scalar variables
    sense min|max               sense of the original model
    offset c0                   objective constant (already sign-adjusted)
    obj i c                     objective coefficient of x_i (minimisation form)
    eq r i a                    coefficient a of x_i in equality row r
    rhs r b                     right-hand side of equality row r
    block k dim name            LMI block k of size dim
    const k i j v               entry (i, j), i ≤ j, of F0 in block k
    coef k var i j v            entry (i, j), i ≤ j, of F_var in block k

Matrices are symmetric, so only the upper triangle is written; the problem is
``min c·x + c0`` s.t. ``A x = b`` and ``F0_k + Σ x_i F_ik ⪰ 0``.
"""

import contextlib
import contextvars
import itertools

import numpy as np
import scipy.sparse as sp

from .problem import LmiBlock, SdpProblem

_TARGET = contextvars.ContextVar("sdp_dump_target", default=None)


def write_problem(problem, path):
    lines = ["sdp 1", f"vars {problem.n_vars}", f"sense {problem.sense}",
             f"offset {float(problem.objective_offset)!r}"]
    for i in np.flatnonzero(problem.objective):
        lines.append(f"obj {i} {float(problem.objective[i])!r}")
    for r, row in enumerate(problem.eq_matrix):
        for i in np.flatnonzero(row):
            lines.append(f"eq {r} {i} {float(row[i])!r}")
        lines.append(f"rhs {r} {float(problem.eq_rhs[r])!r}")
    for k, blk in enumerate(problem.blocks):
        m = blk.dim
        lines.append(f"block {k} {m} {blk.name or '-'}")
        for i, j in zip(*np.nonzero(np.triu(blk.const.real))):
            lines.append(f"const {k} {i} {j} {float(blk.const[i, j].real)!r}")
        F = blk.coeffs.tocoo()
        for r, flat, v in zip(F.row, F.col, F.data):
            i, j = divmod(int(flat), m)
            if i <= j and v != 0:
                lines.append(f"coef {k} {blk.var_idx[r]} {i} {j} {float(v.real)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_problem(path):
    """Inverse of :func:`write_problem`."""
    n, sense, offset = 0, "min", 0.0
    obj, eqs, rhs, blocks = {}, [], {}, {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            tag, *f = line
            if tag == "vars":
                n = int(f[0])
            elif tag == "sense":
                sense = f[0]
            elif tag == "offset":
                offset = float(f[0])
            elif tag == "obj":
                obj[int(f[0])] = float(f[1])
            elif tag == "eq":
                eqs.append((int(f[0]), int(f[1]), float(f[2])))
            elif tag == "rhs":
                rhs[int(f[0])] = float(f[1])
            elif tag == "block":
                blocks[int(f[0])] = {"dim": int(f[1]), "name": "" if f[2] == "-" else f[2],
                                     "const": [], "coef": []}
            elif tag == "const":
                blocks[int(f[0])]["const"].append((int(f[1]), int(f[2]), float(f[3])))
            elif tag == "coef":
                blocks[int(f[0])]["coef"].append((int(f[1]), int(f[2]), int(f[3]), float(f[4])))
            elif tag != "sdp":
                raise ValueError(f"unknown record {tag!r}")
    c = np.zeros(n)
    for i, v in obj.items():
        c[i] = v
    n_eq = len(rhs)
    A = np.zeros((n_eq, n))
    for r, i, a in eqs:
        A[r, i] = a
    b = np.array([rhs[r] for r in range(n_eq)])
    out = []
    for k in sorted(blocks):
        d = blocks[k]
        m = d["dim"]
        const = np.zeros((m, m))
        for i, j, v in d["const"]:
            const[i, j] = const[j, i] = v
        var_idx = np.array(sorted({v for v, *_ in d["coef"]}), dtype=int)
        local = {v: r for r, v in enumerate(var_idx)}
        rows, cols, vals = [], [], []
        for v, i, j, a in d["coef"]:
            for p, q in {(i, j), (j, i)}:
                rows.append(local[v])
                cols.append(p * m + q)
                vals.append(a)
        coeffs = sp.csr_matrix((vals, (rows, cols)), shape=(len(var_idx), m * m))
        out.append(LmiBlock(m, const, var_idx, coeffs, d["name"]))
    return SdpProblem(n, c, A, b, out, offset, sense)


@contextlib.contextmanager
def capture(prefix):
    """Write every problem solved through :meth:`Model.solve` to ``{prefix}-{n}.sdp``."""
    counter = itertools.count()
    token = _TARGET.set((prefix, counter))
    try:
        yield
    finally:
        _TARGET.reset(token)


def maybe_dump(problem):
    target = _TARGET.get()
    if target is None:
        return None
    prefix, counter = target
    path = f"{prefix}-{next(counter)}.sdp"
    write_problem(problem, path)
    return path
