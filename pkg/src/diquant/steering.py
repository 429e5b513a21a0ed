"""Device-dependent steering quantifiers.

All programs decompose an assemblage ``{ρ_{a|x}}`` with the deterministic
response functions ``D(a|x,λ) = δ_{a,λ_x}`` and one hidden state per ``λ``.
When every ``ρ_{a|x}`` is real the hidden states are taken real symmetric;
this loses nothing because the programs are invariant under complex
conjugation and convex.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .quantum import Assemblage, MeasurementAssemblage, deterministic_strategies
from .solver import AffineMatrix, Model, affine_sum

FEAS_TOL = 1e-7


@dataclass
class SteeringResult:
    value: float
    hidden_states: list
    diagnostics: dict
    extra: dict = field(default_factory=dict)


def _hidden_states(m, A):
    D = deterministic_strategies(A.n_settings, A.n_outcomes)
    sig = [m.hermitian(A.dim, real=A.is_real) for _ in range(len(D))]
    return D, sig


def _mixture(D, sig, a, x, dim):
    """``Σ_λ D(a|x,λ) σ_λ`` as an affine matrix."""
    out = AffineMatrix(dim)
    for lam in np.flatnonzero(D[:, a, x]):
        out = out + sig[lam]
    return out


def _result(res, sig, value, **extra):
    states = [s.value(res.x) for s in sig]
    return SteeringResult(float(value), states, res.solution.diagnostics(), extra)


def has_lhs_model(A: Assemblage):
    """Decide whether ``ρ_{a|x} = Σ_λ D(a|x,λ) σ_λ`` with ``σ_λ ⪰ 0``.

    Solved as ``max t`` subject to the equalities and ``σ_λ ⪰ t𝟙``; the
    assemblage is unsteerable when ``t* ≥ -1e-7``. If the feasibility program
    does not reach optimality the answer falls back to ``SR ≤ 1e-7``.

    Returns
    -------
    feasible : bool
    model : list of ndarray or None
        Hidden states of an LHS model when one exists.
    """
    m = Model()
    D, sig = _hidden_states(m, A)
    t = m.scalar()
    eye = np.eye(A.dim)
    for s in sig:
        m.add_psd(s - AffineMatrix.scaled(t, eye))
    for x in range(A.n_settings):
        for a in range(A.n_outcomes):
            m.add_matrix_eq(_mixture(D, sig, a, x, A.dim) - A.rho[a, x])
    m.maximize(t)
    res = m.solve()
    if res.ok:
        feasible = res[t] >= -FEAS_TOL
        return feasible, ([s.value(res.x) for s in sig] if feasible else None)
    sr = steering_robustness(A)
    if sr.value <= FEAS_TOL:
        return True, sr.hidden_states
    return False, None


def steering_robustness(A: Assemblage):
    """``SR = min Σ_λ tr σ_λ - 1`` s.t. ``Σ_λ D(a|x,λ) σ_λ ⪰ ρ_{a|x}``, ``σ_λ ⪰ 0``.

    The dual optimum gives a steering inequality ``{F_{a|x} ⪰ 0}`` with
    ``Σ_{a,x} D(a|x,λ) F_{a|x} ⪯ 𝟙`` for every λ and
    ``SR = Σ tr(F_{a|x} ρ_{a|x}) - 1``; both are reported in ``extra``.
    """
    m = Model()
    D, sig = _hidden_states(m, A)
    for s in sig:
        m.add_psd(s)
    cons = {}
    for x in range(A.n_settings):
        for a in range(A.n_outcomes):
            cons[a, x] = m.add_psd(_mixture(D, sig, a, x, A.dim) - A.rho[a, x])
    m.minimize(affine_sum(s.trace() for s in sig) - 1.0)
    res = m.solve().require("steering robustness")
    F = np.zeros_like(A.rho)
    for (a, x), k in cons.items():
        F[a, x] = res.dual(k)
    ineq = float(np.einsum("axij,axji->", F, A.rho).real) - 1.0
    return _result(res, sig, max(res.value, 0.0), steering_inequality=F, inequality_value=ineq,
                   raw_value=res.value)


def consistent_steering_robustness(A: Assemblage):
    """SR with the noise constrained to share the reduced state ``ρ_B``.

    ``min s - 1`` s.t. ``Σ_λ D(a|x,λ) σ̃_λ ⪰ ρ_{a|x}``, ``Σ_λ σ̃_λ = s ρ_B``;
    the trace condition is linear because ``s`` is a single scalar.
    """
    m = Model()
    D, sig = _hidden_states(m, A)
    s = m.scalar()
    rho_b = A.reduced_state()
    for h in sig:
        m.add_psd(h)
    for x in range(A.n_settings):
        for a in range(A.n_outcomes):
            m.add_psd(_mixture(D, sig, a, x, A.dim) - A.rho[a, x])
    total = AffineMatrix(A.dim)
    for h in sig:
        total = total + h
    m.add_matrix_eq(total - AffineMatrix.scaled(s, rho_b))
    m.minimize(s - 1.0)
    res = m.solve().require("consistent steering robustness")
    return _result(res, sig, max(res.value, 0.0), scale=res[s], raw_value=res.value)


def _range_basis(mat, rel_cut):
    vals, vecs = np.linalg.eigh(mat)
    top = max(vals.max(), 0.0)
    return vecs[:, vals > rel_cut * top] if top > 0 else vecs[:, :0]


def steerable_weight(A: Assemblage, rel_cut=1e-10):
    """``SW = 1 - max Σ_λ tr σ_λ`` s.t. ``ρ_{a|x} ⪰ Σ_λ D(a|x,λ) σ_λ``, ``σ_λ ⪰ 0``.

    The program is posed on its minimal face: ``σ_λ`` is supported on the
    intersection of the ranges of the ``ρ_{λ_x|x}`` it feeds, and each
    constraint is compressed to the range of its ``ρ_{a|x}``. Without this
    the program has no strictly feasible point whenever some ``ρ_{a|x}`` is
    singular, which is the generic case for pure states and projective
    measurements. Eigenvalues below ``rel_cut`` times the largest count as zero.
    """
    m = Model()
    D = deterministic_strategies(A.n_settings, A.n_outcomes)
    dtype = float if A.is_real else complex
    rho = A.rho.real if A.is_real else A.rho
    ranges = {(a, x): _range_basis(rho[a, x], rel_cut).astype(dtype)
              for x in range(A.n_settings) for a in range(A.n_outcomes)}
    eye = np.eye(A.dim, dtype=dtype)
    sig, faces = [], []
    for lam in range(len(D)):
        # common range: kernel of Σ_x (𝟙 - P_x), whose eigenvalues are Σ sin² of principal angles
        outside = sum(eye - ranges[a, x] @ ranges[a, x].conj().T for a, x in zip(*np.nonzero(D[lam])))
        w, vecs = np.linalg.eigh(outside)
        V = vecs[:, w < 1e-9]
        faces.append(V.shape[1])
        if V.shape[1] == 0:
            sig.append(AffineMatrix(A.dim))
            continue
        X = m.hermitian(V.shape[1], real=A.is_real)
        m.add_psd(X)
        sig.append(X.congruence(V.conj().T))
    for (a, x), U in ranges.items():
        if U.shape[1]:
            m.add_psd((-_mixture(D, sig, a, x, A.dim) + A.rho[a, x]).congruence(U))
    if not any(faces):
        return SteeringResult(1.0, [np.zeros((A.dim, A.dim)) for _ in sig], {"face_dims": faces},
                              {"raw_value": 1.0})
    m.maximize(affine_sum(s.trace() for s in sig))
    res = m.solve().require("steerable weight")
    out = _result(res, sig, min(max(1.0 - res.value, 0.0), 1.0), raw_value=1.0 - res.value)
    out.diagnostics["face_dims"] = faces
    return out

def steering_equivalent_observables(A: Assemblage, compress=False, rel_cut=1e-9):
    """``B_{a|x} = ρ_B^{-1/2} ρ_{a|x} ρ_B^{-1/2}`` with the inverse taken on the range of ``ρ_B``.

    With ``compress=True`` the operators are expressed in an orthonormal basis
    of that range, which turns them into a genuine POVM on a space of
    dimension ``rank ρ_B``.
    """
    rho_b = A.reduced_state()
    w = linalg.inv_sqrt_psd(rho_b, pseudo=True, rel_cut=rel_cut)
    B = np.einsum("ij,axjk,kl->axil", w, A.rho, w)
    B = (B + np.conj(np.swapaxes(B, -1, -2))) / 2
    if compress:
        vals, vecs = linalg.eig_hermitian(rho_b)
        v = vecs[:, vals > rel_cut * vals.max()]
        B = np.einsum("ji,axjk,kl->axil", v.conj(), B, v)
    return MeasurementAssemblage(B)
