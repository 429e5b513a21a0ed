"""Generalized robustness of entanglement: PPT relaxation and the isotropic closed form."""

import numpy as np

from . import linalg
from .solver import Model


def _transpose_a(mat, dims):
    """Partial transpose on the first factor of an affine matrix variable."""
    d_a, d_b = dims
    perm = {}
    for i in range(d_a):
        for j in range(d_b):
            for k in range(d_a):
                for l in range(d_b):
                    perm[(i * d_b + j, k * d_b + l)] = (k * d_b + j, i * d_b + l)
    return mat.remap(perm, d_a * d_b)


def er_ppt(rho, dims):
    """Lower bound on ER from ``min tr ω - 1`` s.t. ``ω^{T_A} ⪰ 0``, ``ω ⪰ ρ``.

    Exact for two qubits and for a qubit and a qutrit, where PPT coincides
    with separability.

    Returns
    -------
    value : float
    omega : ndarray
        Optimal unnormalised separable-relaxation operator.
    """
    rho = np.asarray(rho, dtype=complex)
    d = dims[0] * dims[1]
    if rho.shape != (d, d):
        raise ValueError(f"state of shape {rho.shape} does not act on {dims}")
    if abs(np.trace(rho) - 1) > 1e-8 or not linalg.is_psd(rho):
        raise ValueError("rho must be a unit-trace positive semidefinite matrix")
    m = Model()
    real = bool(np.all(np.abs(rho.imag) < 1e-14))
    omega = m.hermitian(d, real=real)
    m.add_psd(omega - rho)
    m.add_psd(_transpose_a(omega, dims))
    m.minimize(omega.trace() - 1.0)
    res = m.solve().require("PPT entanglement robustness")
    return max(res.value, 0.0), omega.value(res.x)


def er_isotropic_analytic(d, v):
    """``ER[ρ_I,d(v)] = max{0, (d-1)/d [(d+1)v - 1]}``."""
    lo = -1.0 / (d * d - 1)
    if not lo - 1e-12 <= v <= 1 + 1e-12:
        raise ValueError(f"visibility {v} outside [{lo:.4g}, 1]")
    return max(0.0, (d - 1) / d * ((d + 1) * v - 1))
