"""States, measurement settings and Born-rule statistics."""

import itertools

import numpy as np

from .. import linalg
from .objects import (
    Assemblage,
    Correlation,
    MeasurementAssemblage,
    TripartiteAssemblage,
    ValidationError,
)

MAX_STRATEGIES = 10**6


def maximally_entangled(d):
    """|Φ+_d⟩ = Σ_i |ii⟩/√d as a state vector."""
    v = np.zeros(d * d, dtype=complex)
    v[[i * d + i for i in range(d)]] = 1.0 / np.sqrt(d)
    return v


def isotropic_state(d, v):
    """``v |Φ+_d⟩⟨Φ+_d| + (1-v) 𝟙/d²`` for ``-1/(d²-1) ≤ v ≤ 1``."""
    lo = -1.0 / (d * d - 1)
    if not lo - 1e-12 <= v <= 1 + 1e-12:
        raise ValueError(f"visibility {v} outside [{lo:.4g}, 1]")
    phi = linalg.proj(maximally_entangled(d))
    return v * phi + (1 - v) * np.eye(d * d) / (d * d)


def pure_partially_entangled(theta):
    """|φ⟩⟨φ| with |φ⟩ = cos θ|00⟩ + sin θ|11⟩."""
    if not 0 < theta <= np.pi / 4 + 1e-12:
        raise ValueError("theta must lie in (0, π/4]")
    psi = np.cos(theta) * linalg.ket(0, 0) + np.sin(theta) * linalg.ket(1, 1)
    return linalg.proj(psi)


def qubit_projective(bloch):
    """Two-outcome projective qubit measurement ``{(𝟙 ± n·σ)/2}``."""
    n = np.asarray(bloch, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-9:
        raise ValueError("Bloch vector must be a unit 3-vector")
    ns = sum(c * s for c, s in zip(n, linalg.PAULIS))
    eye = np.eye(2)
    return (eye + ns) / 2, (eye - ns) / 2


def qubit_measurements(blochs):
    """Measurement assemblage with one projective setting per Bloch vector."""
    return MeasurementAssemblage.from_settings([qubit_projective(b) for b in blochs])


def basis_measurement(unitary):
    """Rank-one projective measurement onto the columns of ``unitary``."""
    u = np.asarray(unitary)
    return [np.outer(u[:, k], u[:, k].conj()) for k in range(u.shape[1])]


def born_correlation(rho, parts):
    """``P(a,b|x,y) = tr(ρ E_{a|x} ⊗ E_{b|y})`` (or the tripartite analogue)."""
    rho = np.asarray(rho)
    dims = [p.dim for p in parts]
    if rho.shape != (np.prod(dims),) * 2:
        raise ValidationError(f"state of shape {rho.shape} incompatible with parts of dims {dims}")
    t = rho.reshape(dims * 2)
    if len(parts) == 2:
        ea, eb = parts[0].povms, parts[1].povms
        table = np.einsum("ijkl,axki,bylj->abxy", t, ea, eb)
    elif len(parts) == 3:
        ea, eb, ec = (p.povms for p in parts)
        table = np.einsum("ijkmno,axmi,byjn,czok->abcxyz", t, ea, eb, ec)
    else:
        raise ValidationError("born_correlation supports 2 or 3 parties")
    return Correlation(table.real)


def assemblage_from_state(rho, alice):
    """``ρ_{a|x} = tr_A[(E_{a|x} ⊗ 𝟙) ρ]``."""
    rho = np.asarray(rho)
    d_a = alice.dim
    if rho.shape[0] % d_a:
        raise ValidationError("state dimension is not a multiple of Alice's dimension")
    d_b = rho.shape[0] // d_a
    t = rho.reshape(d_a, d_b, d_a, d_b)
    return Assemblage(np.einsum("axki,ijkl->axjl", alice.povms, t))


def tripartite_assemblage_from_state(rho, alice, bob):
    d_a, d_b = alice.dim, bob.dim
    d_c = rho.shape[0] // (d_a * d_b)
    t = rho.reshape(d_a, d_b, d_c, d_a, d_b, d_c)
    return TripartiteAssemblage(np.einsum("axli,bymj,ijklmn->abxykn", alice.povms, bob.povms, t))


def deterministic_strategies(n_x, n_a):
    """All deterministic response functions ``D(a|x,λ) = δ_{a,λ_x}``.

    Returns an array of shape ``(n_a**n_x, n_a, n_x)``; strategy ``λ`` is the
    tuple ``(λ_0, ..., λ_{n_x-1})`` in lexicographic order.
    """
    if n_x < 1 or n_a < 1:
        raise ValueError("counts must be positive")
    if n_a**n_x > MAX_STRATEGIES:
        raise OverflowError(f"{n_a}^{n_x} deterministic strategies exceed the cap {MAX_STRATEGIES}")
    lams = np.array(list(itertools.product(range(n_a), repeat=n_x)), dtype=int).reshape(-1, n_x)
    D = np.zeros((len(lams), n_a, n_x))
    for k, lam in enumerate(lams):
        D[k, lam, np.arange(n_x)] = 1.0
    return D


def local_deterministic_correlation(alice_outputs, bob_outputs, n_a, n_b):
    """Correlation of the deterministic strategy ``a = f(x)``, ``b = g(y)``."""
    n_x, n_y = len(alice_outputs), len(bob_outputs)
    t = np.zeros((n_a, n_b, n_x, n_y))
    for x, a in enumerate(alice_outputs):
        for y, b in enumerate(bob_outputs):
            t[a, b, x, y] = 1.0
    return Correlation(t)


def chsh_settings():
    """Alice σz, σx; Bob (σx ∓ σz)/√2, optimal for CHSH on |Φ+⟩."""
    r = 1 / np.sqrt(2)
    alice = qubit_measurements([(0, 0, 1), (1, 0, 0)])
    bob = qubit_measurements([(r, 0, -r), (r, 0, r)])
    return alice, bob


def ch_settings(theta):
    """Alice σz, σx; Bob cos μ σz ± sin μ σx with tan μ = sin 2θ.

    Maximises the CH (equivalently CHSH) value of cos θ|00⟩ + sin θ|11⟩ with
    Alice restricted to σz and σx; at θ = π/4 Bob's two Bloch vectors are
    orthogonal and they close up as θ → 0.
    """
    mu = np.arctan(np.sin(2 * theta))
    alice = qubit_measurements([(0, 0, 1), (1, 0, 0)])
    bob = qubit_measurements([(np.sin(mu), 0, np.cos(mu)), (-np.sin(mu), 0, np.cos(mu))])
    return alice, bob


def elegant_settings():
    """Settings reaching 4√3 for the elegant inequality on |Φ+⟩.

    Bob measures σx, σy, σz; Alice measures along the tetrahedron directions
    adapted to the correlation matrix diag(1, -1, 1) of |Φ+⟩.
    """
    c = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    t = np.diag([1.0, -1.0, 1.0])
    alice = qubit_measurements([t @ row / np.sqrt(3) for row in c])
    bob = qubit_measurements(np.eye(3))
    return alice, bob


def pr_box_assemblage(rho_hat):
    """Post-quantum assemblage ``ρ_{ab|xy} = ¼[1 - (-1)^{a⊕b ⊕ xy}] ρ̂`` (0-based x, y).

    Its A-B marginal is a Popescu-Rohrlich box.
    """
    rho_hat = np.asarray(rho_hat, dtype=complex)
    if abs(np.trace(rho_hat) - 1) > 1e-9 or linalg.min_eig(rho_hat) < -1e-9:
        raise ValueError("rho_hat must be a unit-trace positive semidefinite matrix")
    d = rho_hat.shape[0]
    out = np.zeros((2, 2, 2, 2, d, d), dtype=complex)
    for a, b, x, y in itertools.product(range(2), repeat=4):
        out[a, b, x, y] = 0.25 * (1 - (-1) ** (a + b + x * y)) * rho_hat
    return TripartiteAssemblage(out)


def pr_box():
    """PR-box correlation, the A-B marginal of :func:`pr_box_assemblage`."""
    return pr_box_assemblage(np.eye(1)).marginal_ab()
