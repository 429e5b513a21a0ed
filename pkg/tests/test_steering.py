import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diquant import linalg, steering
from diquant import quantum as q

from . import oracles

SQ2 = np.sqrt(2)


def _phi_plus_zx():
    alice = q.qubit_measurements([(0, 0, 1), (1, 0, 0)])
    return q.assemblage_from_state(q.isotropic_state(2, 1.0), alice)


def _random_instance(seed, n_x=2, mixed=True):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(4, r, rank=None if mixed else 1)
    blochs = [v / np.linalg.norm(v) for v in r.standard_normal((n_x, 3))]
    return q.assemblage_from_state(rho, q.qubit_measurements(blochs))


def test_sr_of_maximally_entangled_with_unbiased_pair():
    A = _phi_plus_zx()
    value = steering.steering_robustness(A).value
    assert value == pytest.approx(oracles.sr(A.rho), abs=1e-6)
    # closed form of the oracle value
    assert value == pytest.approx(3 - 2 * SQ2, abs=1e-6)


def test_steering_inequality_certificate():
    A = _phi_plus_zx()
    res = steering.steering_robustness(A)
    F = res.extra["steering_inequality"]
    assert res.extra["inequality_value"] == pytest.approx(res.value, abs=1e-6)
    for f in F.reshape(-1, 2, 2):
        assert linalg.min_eig(f) >= -1e-7


def test_sr_and_sw_are_zero_for_product_states():
    rho = np.kron(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
    A = q.assemblage_from_state(rho, q.chsh_settings()[0])
    assert steering.steering_robustness(A).value == pytest.approx(0, abs=1e-6)
    assert steering.steerable_weight(A).value == pytest.approx(0, abs=1e-6)
    ok, model = steering.has_lhs_model(A)
    assert ok and len(model) == 4


@settings(max_examples=8)
@given(st.integers(0, 2**31 - 1), st.sampled_from([1, 2]))
def test_sw_on_singular_assemblages(seed, rank):
    # pure or rank-2 states give singular ρ_{a|x}; the program is posed on its minimal face
    r = np.random.default_rng(seed)
    rho = linalg.random_density(4, r, rank=rank)
    blochs = [v / np.linalg.norm(v) for v in r.standard_normal((2, 3))]
    A = q.assemblage_from_state(rho, q.qubit_measurements(blochs))
    res = steering.steerable_weight(A)
    assert res.value == pytest.approx(min(max(oracles.sw(A.rho), 0), 1), abs=1e-5)
    # the hidden states still satisfy the full-dimensional constraints
    D = q.deterministic_strategies(2, 2)
    for x in range(2):
        for a in range(2):
            mix = sum(res.hidden_states[lam] for lam in np.flatnonzero(D[:, a, x]))
            assert linalg.min_eig(A.rho[a, x] - mix) >= -1e-7


def test_pure_entangled_state_is_fully_steerable():
    A = q.assemblage_from_state(q.pure_partially_entangled(np.pi / 7), q.chsh_settings()[0])
    assert steering.steerable_weight(A).value == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=8)
@given(st.integers(0, 2**31 - 1))
def test_quantifiers_match_cvxpy(seed):
    A = _random_instance(seed)
    assert steering.steering_robustness(A).value == pytest.approx(max(oracles.sr(A.rho), 0), abs=1e-5)
    assert steering.consistent_steering_robustness(A).value == pytest.approx(
        max(oracles.src(A.rho), 0), abs=1e-5)
    assert steering.steerable_weight(A).value == pytest.approx(min(max(oracles.sw(A.rho), 0), 1), abs=1e-5)


@settings(max_examples=10)
@given(st.integers(0, 2**31 - 1))
def test_consistent_sr_dominates_sr(seed):
    A = _random_instance(seed)
    assert steering.consistent_steering_robustness(A).value >= steering.steering_robustness(A).value - 1e-7


@settings(max_examples=10)
@given(st.integers(0, 2**31 - 1))
def test_hidden_states_reproduce_lhs_mixture(seed):
    A = _random_instance(seed)
    res = steering.steering_robustness(A)
    D = q.deterministic_strategies(A.n_settings, A.n_outcomes)
    total = sum(np.trace(s).real for s in res.hidden_states)
    assert total - 1 == pytest.approx(res.value, abs=1e-6)
    for x in range(A.n_settings):
        for a in range(A.n_outcomes):
            mix = sum(D[k, a, x] * s for k, s in enumerate(res.hidden_states))
            assert linalg.min_eig(mix - A.rho[a, x]) >= -1e-6


def test_steering_equivalent_observables_form_povm():
    A = _random_instance(3)
    B = steering.steering_equivalent_observables(A)
    B.validate(tol=1e-7)


def test_steering_equivalent_observables_compress_rank_deficient():
    # Bob's reduced state is |0><0|, so the observables live on a one-dimensional range
    prod = np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    A = q.assemblage_from_state(prod, q.chsh_settings()[0])
    B = steering.steering_equivalent_observables(A, compress=True)
    assert B.dim == 1
    B.validate(tol=1e-7)
