"""Dense complex linear algebra used throughout the package.

All matrices are plain ``numpy.ndarray`` objects (complex or real). Sizes in
this package stay well below a few hundred rows, so everything is dense.
"""

import numpy as np

HERM_TOL = 1e-10
PSD_TOL = 1e-9


def kron(*mats):
    """Kronecker product of one or more matrices, left to right."""
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m))
    return out


def _check_bipartite(mat, dims):
    mat = np.asarray(mat)
    d_a, d_b = dims
    if mat.ndim != 2 or mat.shape != (d_a * d_b, d_a * d_b):
        raise ValueError(
            f"matrix of shape {mat.shape} does not act on a {d_a}x{d_b} system"
        )
    return mat.reshape(d_a, d_b, d_a, d_b)


def partial_trace(mat, dims, over="A"):
    """Trace out one subsystem of a bipartite operator.

    Parameters
    ----------
    mat : ndarray
        Square matrix acting on ``A ⊗ B``.
    dims : tuple of int
        ``(d_A, d_B)``.
    over : {"A", "B"}
        Subsystem that is traced out.
    """
    t = _check_bipartite(mat, dims)
    if over == "A":
        return np.einsum("ijik->jk", t)
    if over == "B":
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"unknown subsystem {over!r}")


def partial_transpose(mat, dims, on="A"):
    """Transpose one tensor factor of a bipartite operator."""
    d_a, d_b = dims
    t = _check_bipartite(mat, dims)
    if on == "A":
        t = t.transpose(2, 1, 0, 3)
    elif on == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"unknown subsystem {on!r}")
    return t.reshape(d_a * d_b, d_a * d_b)


def is_hermitian(mat, tol=HERM_TOL):
    mat = np.asarray(mat)
    return mat.ndim == 2 and mat.shape[0] == mat.shape[1] and np.allclose(
        mat, mat.conj().T, atol=tol, rtol=0
    )


def eig_hermitian(mat):
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in ascending order and the matrix whose columns are
    the matching orthonormal eigenvectors. Eigenvector phases are fixed so
    that the largest-magnitude component of each vector is real positive,
    which makes the output reproducible.
    """
    mat = np.asarray(mat)
    if not is_hermitian(mat):
        raise ValueError("matrix is not Hermitian")
    herm = (mat + mat.conj().T) / 2
    vals, vecs = np.linalg.eigh(herm)
    idx = np.argmax(np.abs(vecs), axis=0)
    phase = vecs[idx, np.arange(vecs.shape[1])]
    phase = phase / np.abs(phase)
    vecs = vecs / phase
    return vals, vecs


def min_eig(mat):
    """Smallest eigenvalue of a Hermitian matrix."""
    mat = np.asarray(mat)
    return float(np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0])


def is_psd(mat, tol=PSD_TOL):
    return min_eig(mat) >= -tol


def range_projector(mat, rel_cut=1e-9):
    """Projector onto the span of eigenvectors with non-negligible eigenvalue."""
    vals, vecs = eig_hermitian(mat)
    keep = vals > rel_cut * max(vals.max(), 0.0)
    v = vecs[:, keep]
    return v @ v.conj().T


def inv_sqrt_psd(mat, pseudo=False, rel_cut=1e-9):
    """Inverse square root of a positive semidefinite matrix.

    With ``pseudo=True`` the inversion is restricted to the range of ``mat``:
    eigenvalues below ``rel_cut * λ_max`` are treated as exact zeros and
    mapped to zero. Without it, a singular input raises ``ValueError``.
    """
    vals, vecs = eig_hermitian(mat)
    if vals[0] < -PSD_TOL:
        raise ValueError(f"matrix has negative eigenvalue {vals[0]:.3g}")
    cut = rel_cut * max(vals[-1], 0.0)
    keep = vals > cut
    if not pseudo and not keep.all():
        raise ValueError("matrix is singular; use pseudo=True")
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / np.sqrt(vals[keep])
    return (vecs * inv) @ vecs.conj().T


def ket(*digits, dim=2):
    """Computational basis vector |d1 d2 ...> with local dimension ``dim``."""
    v = np.zeros(dim ** len(digits), dtype=complex)
    idx = 0
    for d in digits:
        idx = idx * dim + d
    v[idx] = 1.0
    return v


def proj(vec):
    vec = np.asarray(vec).reshape(-1)
    return np.outer(vec, vec.conj())


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def random_unitary(d, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d, rng, rank=None):
    """Random density matrix from a Ginibre ensemble of the given rank."""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
