import numpy as np
import pytest
from hypothesis import given, strategies as st

from diquant import linalg

seeds = st.integers(0, 2**31 - 1)


def _explicit_partial_trace_b(mat, d_a, d_b):
    out = np.zeros((d_a, d_a), dtype=complex)
    for k in range(d_b):
        v = np.zeros(d_b)
        v[k] = 1
        K = np.kron(np.eye(d_a), v[None, :])
        out += K @ mat @ K.conj().T
    return out


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_partial_trace_matches_kraus_sum(seed, d_a, d_b):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(d_a * d_b, r)
    assert np.allclose(linalg.partial_trace(rho, (d_a, d_b), over="B"),
                       _explicit_partial_trace_b(rho, d_a, d_b))


@given(seeds)
def test_partial_trace_of_product(seed):
    r = np.random.default_rng(seed)
    a, b = linalg.random_density(2, r), linalg.random_density(3, r)
    ab = linalg.kron(a, b)
    assert np.allclose(linalg.partial_trace(ab, (2, 3), over="A"), b)
    assert np.allclose(linalg.partial_trace(ab, (2, 3), over="B"), a)


@given(seeds)
def test_partial_transpose_is_involution_and_matches_product_rule(seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2))
    b = r.standard_normal((3, 3)) + 1j * r.standard_normal((3, 3))
    ab = np.kron(a, b)
    assert np.allclose(linalg.partial_transpose(ab, (2, 3), on="A"), np.kron(a.T, b))
    assert np.allclose(linalg.partial_transpose(ab, (2, 3), on="B"), np.kron(a, b.T))
    rho = linalg.random_density(6, r)
    pt = linalg.partial_transpose(rho, (2, 3))
    assert np.allclose(linalg.partial_transpose(pt, (2, 3)), rho)


def test_partial_transpose_of_bell_state_has_negative_eigenvalue():
    phi = (linalg.ket(0, 0) + linalg.ket(1, 1)) / np.sqrt(2)
    w = np.linalg.eigvalsh(linalg.partial_transpose(linalg.proj(phi), (2, 2)))
    assert w[0] == pytest.approx(-0.5)


@given(seeds, st.integers(1, 6))
def test_eig_hermitian_reconstructs(seed, d):
    r = np.random.default_rng(seed)
    g = r.standard_normal((d, d)) + 1j * r.standard_normal((d, d))
    h = g + g.conj().T
    w, v = linalg.eig_hermitian(h)
    assert np.all(np.diff(w) >= -1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-10)
    assert np.allclose(w, np.linalg.eigvalsh(h), atol=1e-10)


def test_eig_hermitian_is_deterministic():
    h = np.array([[1.0, 1.0], [1.0, 1.0]])
    w1, v1 = linalg.eig_hermitian(h)
    w2, v2 = linalg.eig_hermitian(h.copy())
    assert np.array_equal(w1, w2) and np.array_equal(v1, v2)


@given(seeds, st.integers(1, 4))
def test_random_density_is_state(seed, d):
    rho = linalg.random_density(d, np.random.default_rng(seed))
    assert linalg.is_hermitian(rho)
    assert linalg.is_psd(rho)
    assert np.trace(rho).real == pytest.approx(1.0)


@given(seeds)
def test_inv_sqrt_psd(seed):
    rho = linalg.random_density(3, np.random.default_rng(seed))
    s = linalg.inv_sqrt_psd(rho)
    assert np.allclose(s @ rho @ s, np.eye(3), atol=1e-7)


def test_inv_sqrt_pseudo_on_rank_deficient():
    rho = np.diag([0.5, 0.5, 0.0])
    s = linalg.inv_sqrt_psd(rho, pseudo=True)
    assert np.allclose(s @ rho @ s, np.diag([1.0, 1.0, 0.0]))
    assert np.allclose(linalg.range_projector(rho), np.diag([1.0, 1.0, 0.0]))


def test_random_unitary_is_unitary(rng):
    u = linalg.random_unitary(4, rng)
    assert np.allclose(u @ u.conj().T, np.eye(4))


def test_bad_dims_rejected():
    with pytest.raises(ValueError):
        linalg.partial_trace(np.eye(5), (2, 3))
