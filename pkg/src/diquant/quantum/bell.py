"""Bell functionals, their local bounds, and see-saw optimisation of settings."""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .. import linalg
from .objects import Correlation, MeasurementAssemblage, Scenario, ValidationError
from .states import born_correlation

log = logging.getLogger(__name__)


@dataclass
class BellFunctional:
    """Linear functional ``Σ β[a,b,x,y] P(a,b|x,y)``.

    ``local_bound`` is the maximum over local deterministic strategies and
    ``quantum_bound`` the Tsirelson-type maximum when known.
    """

    coeffs: np.ndarray
    local_bound: float = None
    quantum_bound: float = None
    name: str = ""

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 4:
            raise ValidationError("Bell coefficients must be indexed [a, b, x, y]")
        if self.local_bound is None:
            self.local_bound = local_bound(self.coeffs)

    @property
    def scenario(self):
        n_a, n_b, n_x, n_y = self.coeffs.shape
        return Scenario.bipartite(n_x, n_y, n_a, n_b)

    def __call__(self, P):
        return bell_value(self, P)

    def algebraic_range(self):
        """Minimum and maximum over all (possibly signalling) probability tables."""
        c = self.coeffs
        lo = c.min(axis=(0, 1)).sum()
        hi = c.max(axis=(0, 1)).sum()
        return float(lo), float(hi)


def bell_value(f, P):
    table = P.table if isinstance(P, Correlation) else np.asarray(P)
    if table.shape != f.coeffs.shape:
        raise ValidationError(f"correlation shape {table.shape} does not match functional {f.coeffs.shape}")
    return float(np.sum(f.coeffs * table))


def local_bound(coeffs):
    """Maximum of the functional over local deterministic strategies."""
    coeffs = np.asarray(coeffs, dtype=float)
    n_a, n_b, n_x, n_y = coeffs.shape
    if n_a**n_x > 10**6:
        raise OverflowError("too many deterministic strategies for Alice")
    best = -np.inf
    for lam in itertools.product(range(n_a), repeat=n_x):
        # coefficient table seen by Bob once Alice's outputs are fixed: [b, y]
        g = sum(coeffs[lam[x], :, x, :] for x in range(n_x))
        best = max(best, g.max(axis=0).sum())
    return float(best)


def correlator_functional(corr_coeffs, name="", quantum_bound=None):
    """Functional ``Σ c[x,y] E_xy`` for binary outcomes, ``E_xy = Σ (-1)^{a+b} P``."""
    c = np.asarray(corr_coeffs, dtype=float)
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
    coeffs = np.einsum("ab,xy->abxy", sign, c)
    return BellFunctional(coeffs, quantum_bound=quantum_bound, name=name)


def chsh():
    """``S = -E_00 + E_01 + E_10 + E_11``; local bound 2, quantum bound 2√2."""
    return correlator_functional([[-1, 1], [1, 1]], "CHSH", 2 * np.sqrt(2))


def chsh_variants():
    """The eight relabelling-equivalent CHSH expressions (sign of one E flipped each)."""
    out = []
    for k in range(4):
        c = np.ones((2, 2))
        c.flat[k] = -1
        out.append(correlator_functional(c, f"CHSH[{k}]", 2 * np.sqrt(2)))
        out.append(correlator_functional(-c, f"-CHSH[{k}]", 2 * np.sqrt(2)))
    return out


def max_chsh(P):
    """Largest CHSH value over relabellings of inputs and outputs."""
    return max(bell_value(f, P) for f in chsh_variants())


def ch():
    """Clauser-Horne functional, local bound 0.

    ``P(00|00) + P(00|01) + P(00|10) - P(00|11) - P_A(0|0) - P_B(0|0)``
    """
    c = np.zeros((2, 2, 2, 2))
    c[0, 0, 0, 0] += 1
    c[0, 0, 0, 1] += 1
    c[0, 0, 1, 0] += 1
    c[0, 0, 1, 1] -= 1
    # marginals, written with y = 0 (resp. x = 0) fixed
    c[0, :, 0, 0] -= 1
    c[:, 0, 0, 0] -= 1
    return BellFunctional(c, quantum_bound=(np.sqrt(2) - 1) / 2, name="CH")


ELEGANT_SIGNS = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)


def elegant():
    """Elegant Bell functional (4 settings for Alice, 3 for Bob); local 6, quantum 4√3."""
    return correlator_functional(ELEGANT_SIGNS, "elegant", 4 * np.sqrt(3))


def i3322():
    """I3322 in Collins-Gisin form; local bound 0, |Φ+⟩ reaches 1/4."""
    c = np.zeros((2, 2, 3, 3))
    joint = np.array([[1, 1, 1], [1, 1, -1], [1, -1, 0]], dtype=float)
    c[0, 0] += joint
    alice = np.array([-2.0, -1.0, 0.0])
    bob = np.array([-1.0, 0.0, 0.0])
    for x in range(3):
        c[0, :, x, 0] += alice[x]
    for y in range(3):
        c[:, 0, 0, y] += bob[y]
    return BellFunctional(c, quantum_bound=0.25087, name="I3322")


def cglmp(d=3):
    """CGLMP functional for two settings and ``d`` outcomes; local bound 2.

    For ``d = 3`` this is the standard form of the I2233 inequality.
    """
    c = np.zeros((d, d, 2, 2))
    for k in range(d // 2):
        w = 1 - 2 * k / (d - 1)
        for a, b in itertools.product(range(d), repeat=2):
            # P(A0 = B0 + k), P(B0 = A1 + k + 1), P(A1 = B1 + k), P(B1 = A0 + k)
            if (a - b) % d == k:
                c[a, b, 0, 0] += w
            if (b - a) % d == (k + 1) % d:
                c[a, b, 1, 0] += w
            if (a - b) % d == k:
                c[a, b, 1, 1] += w
            if (b - a) % d == k:
                c[a, b, 0, 1] += w
            if (a - b) % d == (-k - 1) % d:
                c[a, b, 0, 0] -= w
            if (b - a) % d == (-k) % d:
                c[a, b, 1, 0] -= w
            if (a - b) % d == (-k - 1) % d:
                c[a, b, 1, 1] -= w
            if (b - a) % d == (-k - 1) % d:
                c[a, b, 0, 1] -= w
    return BellFunctional(c, name=f"CGLMP{d}")


def i2233():
    return cglmp(3)


FUNCTIONALS = {
    "chsh": chsh,
    "ch": ch,
    "elegant": elegant,
    "i3322": i3322,
    "i2233": i2233,
}


def functional(name):
    try:
        return FUNCTIONALS[name.lower()]()
    except KeyError:
        raise ValidationError(f"unknown Bell functional {name!r}") from None


# --------------------------------------------------------------------------
# see-saw


@dataclass
class SeesawResult:
    alice: MeasurementAssemblage
    bob: MeasurementAssemblage
    value: float
    converged: bool
    history: list


def _effective_operators(f, rho, other, dims, party):
    """``W[a, x] = tr_other[(𝟙 ⊗ Σ_{b,y} β E_{b|y}) ρ]`` for the optimised party."""
    d_a, d_b = dims
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if party == 0:
        K = np.einsum("abxy,byij->axij", f.coeffs, other.povms)
        return np.einsum("ijkl,axlj->axik", t, K)
    K = np.einsum("abxy,axij->byij", f.coeffs, other.povms)
    return np.einsum("ijkl,axki->axjl", t, K)


def _best_povm(W, dim):
    """Optimal POVM for ``max Σ_a tr(E_a W_a)`` at one setting."""
    n_out = W.shape[0]
    if n_out == 2:
        vals, vecs = linalg.eig_hermitian((W[0] - W[1] + (W[0] - W[1]).conj().T) / 2)
        pos = vecs[:, vals > 0]
        e0 = pos @ pos.conj().T
        return np.stack([e0, np.eye(dim) - e0])
    # more than two outcomes: the optimal POVM is itself a small SDP
    from ..solver import AffineMatrix, Model, affine_sum

    m = Model()
    real = all(np.allclose(w.imag, 0) for w in W)
    E = [m.hermitian(dim, real=real) for _ in range(n_out - 1)]
    last = AffineMatrix.constant(np.eye(dim))
    for e in E:
        last = last - e
        m.add_psd(e)
    m.add_psd(last)
    obj = affine_sum(E[a].inner(W[a]) for a in range(n_out - 1)) + last.inner(W[-1])
    m.maximize(obj)
    res = m.solve()
    out = [e.value(res.x) for e in E] + [last.value(res.x)]
    return np.stack(out)


def _random_measurement(n_out, n_set, dim, rng):
    povms = np.zeros((n_out, n_set, dim, dim), dtype=complex)
    for x in range(n_set):
        u = linalg.random_unitary(dim, rng)
        labels = rng.integers(0, n_out, size=dim)
        labels[:min(n_out, dim)] = rng.permutation(n_out)[:min(n_out, dim)]
        for k in range(dim):
            povms[labels[k], x] += np.outer(u[:, k], u[:, k].conj())
    return MeasurementAssemblage(povms)


def seesaw_optimize(f, rho, dims=None, restarts=20, seed=1234, max_sweeps=200, tol=1e-10,
                    alice=None):
    """Heuristic maximisation of ``f`` over measurements on ``rho``.

    Alternates between the two parties; each half-sweep computes the optimal
    POVM of every setting with the other party fixed, so the value never
    decreases. ``alice`` fixes Alice's settings and optimises Bob only.
    Restarts are run sequentially with a seeded generator; the best value wins
    and ties go to the earliest restart.

    Returns
    -------
    SeesawResult
        ``converged`` is False when the best run hit ``max_sweeps``.
    """
    rho = np.asarray(rho, dtype=complex)
    n_a, n_b, n_x, n_y = f.coeffs.shape
    if dims is None:
        d = int(round(np.sqrt(rho.shape[0])))
        dims = (d, d)
    rng = np.random.default_rng(seed)
    best = None
    for r in range(restarts):
        A = alice if alice is not None else _random_measurement(n_a, n_x, dims[0], rng)
        B = _random_measurement(n_b, n_y, dims[1], rng)
        value = -np.inf
        history = []
        converged = False
        for _ in range(max_sweeps):
            WB = _effective_operators(f, rho, A, dims, 1)
            B = MeasurementAssemblage(np.stack([_best_povm(WB[:, y], dims[1]) for y in range(n_y)], axis=1))
            if alice is None:
                WA = _effective_operators(f, rho, B, dims, 0)
                A = MeasurementAssemblage(np.stack([_best_povm(WA[:, x], dims[0]) for x in range(n_x)], axis=1))
            new = bell_value(f, born_correlation(rho, [A, B]))
            history.append(new)
            if new - value < tol:
                value = max(value, new)
                converged = True
                break
            value = new
        log.debug("see-saw restart %d: %.10f", r, value)
        if best is None or value > best.value + 1e-12:
            best = SeesawResult(A, B, value, converged, history)
        if alice is not None and r >= 2:
            break
    return best
