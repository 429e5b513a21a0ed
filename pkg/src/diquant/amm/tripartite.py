"""AMMs for two untrusted parties steering a trusted third.

For ``ρ^C_{ab|xy}`` held by Charlie, the AMM with respect to words in
Charlie's projectors ``E_{c|z}`` has Normalization entries ``P(a,b|x,y)``,
Probability entries ``P(a,b,c|x,y,z)`` and real unknowns. Positivity of all
``χ_{ab|xy}`` plus no-signalling of the unknowns in ``a`` and in ``b`` is the
whole model; it admits post-quantum assemblages.
"""

import numpy as np

from ..quantum import Correlation, TripartiteAssemblage, qubit_measurements
from ..solver import AffineMatrix, Model, Status, affine_sum
from .template import AmmTemplate

FEAS_TOL = 1e-7


def _default_charlie(dim):
    if dim != 2:
        raise ValueError("pass Charlie's measurements explicitly for a non-qubit assemblage")
    return qubit_measurements([[0, 0, 1], [1, 0, 0]])


def tripartite_amm_feasible(data, level=1, charlie=None):
    """Check whether a tripartite correlation admits positive, consistent AMMs.

    Parameters
    ----------
    data : TripartiteAssemblage or Correlation
        An assemblage is first turned into ``P(a,b,c|x,y,z)`` with Charlie's
        measurements ``charlie`` (``σz``, ``σx`` for qubits by default).
    level : int

    Returns
    -------
    feasible : bool
    certificate : dict
        ``margin`` is the optimal ``t`` in ``χ_{ab|xy} ⪰ t𝟙``; ``moments``
        holds the AMMs keyed by ``"a,b,x,y"``.
    """
    if isinstance(data, TripartiteAssemblage):
        data.validate()
        charlie = charlie if charlie is not None else _default_charlie(data.dim)
        P = data.correlation(charlie)
    else:
        P = data if isinstance(data, Correlation) else Correlation(data)
    if P.parties != 3:
        raise ValueError("expected a tripartite correlation")
    n_a, n_b, n_c, n_x, n_y, n_z = P.shape
    table = P.table
    pab = table.sum(axis=2)[..., 0]  # [a, b, x, y]
    t = AmmTemplate(n_z, n_c, level)
    m = Model()
    u = {}
    chi, looks = {}, {}
    for a, b, x, y in np.ndindex(n_a, n_b, n_x, n_y):
        for s in t.unknowns:
            u[a, b, x, y, s] = m.scalar()

        def look(sym, a=a, b=b, x=x, y=y):
            if sym[0] == "1":
                return pab[a, b, x, y]
            if sym[0] == "P":
                return table[a, b, sym[2], x, y, sym[1]]
            return u[a, b, x, y, sym]

        looks[a, b, x, y] = look
        chi[a, b, x, y] = t.affine(look)
    # constant entries are checked on the spot, so signalling data become infeasible
    for s in t.symbols[1:]:
        for b, y in np.ndindex(n_b, n_y):
            ref = affine_sum(looks[a, b, 0, y](s) for a in range(n_a))
            for x in range(1, n_x):
                m.add_eq(affine_sum(looks[a, b, x, y](s) for a in range(n_a)) - ref, name="no-signalling A")
        for a, x in np.ndindex(n_a, n_x):
            ref = affine_sum(looks[a, b, x, 0](s) for b in range(n_b))
            for y in range(1, n_y):
                m.add_eq(affine_sum(looks[a, b, x, y](s) for b in range(n_b)) - ref, name="no-signalling B")
    margin = m.scalar()
    eye = np.eye(t.dim)
    for c in chi.values():
        m.add_psd(c - AffineMatrix.scaled(margin, eye))
    m.add_nonneg(1.0 - margin)
    m.maximize(margin)
    res = m.solve()
    if res.status == Status.PRIMAL_INFEASIBLE:
        return False, {"margin": float("-inf"), "moments": {}, "diagnostics": res.solution.diagnostics()}
    res.require("tripartite AMM feasibility")
    cert = {
        "margin": float(res.value),
        "moments": {",".join(map(str, k)): c.value(res.x).real for k, c in chi.items()},
        "diagnostics": res.solution.diagnostics(),
    }
    return bool(res.value >= -FEAS_TOL), cert
