import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diquant import incompat, linalg, steering
from diquant import quantum as q

from . import oracles

SQ2 = np.sqrt(2)


def _random_qubit_measurements(seed, n_x=2):
    r = np.random.default_rng(seed)
    return q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((n_x, 3))])


def test_unbiased_pair():
    M = q.qubit_measurements([(0, 0, 1), (1, 0, 0)])
    value = incompat.incompatibility_robustness(M).value
    assert value == pytest.approx(oracles.ir(M.povms), abs=1e-6)
    assert value == pytest.approx(3 - 2 * SQ2, abs=1e-6)
    assert incompat.incompatibility_weight(M).value == pytest.approx(oracles.iw(M.povms), abs=1e-6)


def test_commuting_measurements_are_compatible():
    M = q.qubit_measurements([(0, 0, 1), (0, 0, -1)])
    ok, parent = incompat.is_jointly_measurable(M)
    assert ok
    assert incompat.incompatibility_robustness(M).value == pytest.approx(0, abs=1e-6)
    assert incompat.incompatibility_weight(M).value == pytest.approx(0, abs=1e-6)


def test_noisy_pair_becomes_compatible():
    # unsharp σz, σx with sharpness η are jointly measurable iff η ≤ 1/√2
    def unsharp(eta):
        M = q.qubit_measurements([(0, 0, 1), (1, 0, 0)])
        return q.MeasurementAssemblage(eta * M.povms + (1 - eta) * np.eye(2) / 2)

    assert incompat.is_jointly_measurable(unsharp(0.70))[0]
    assert not incompat.is_jointly_measurable(unsharp(0.72))[0]


@settings(max_examples=8)
@given(st.integers(0, 2**31 - 1))
def test_quantifiers_match_cvxpy(seed):
    M = _random_qubit_measurements(seed)
    assert incompat.incompatibility_robustness(M).value == pytest.approx(max(oracles.ir(M.povms), 0), abs=1e-5)
    assert incompat.incompatibility_weight(M).value == pytest.approx(
        min(max(oracles.iw(M.povms), 0), 1), abs=1e-5)


@settings(max_examples=8)
@given(st.integers(0, 2**31 - 1))
def test_parent_marginals(seed):
    M = _random_qubit_measurements(seed)
    res = incompat.incompatibility_robustness(M)
    D = q.deterministic_strategies(M.n_settings, M.n_outcomes)
    total = sum(res.parent)
    assert np.allclose(total, total[0, 0] * np.eye(2), atol=1e-6)
    for x in range(M.n_settings):
        for a in range(M.n_outcomes):
            mix = sum(D[k, a, x] * g for k, g in enumerate(res.parent))
            assert linalg.min_eig(mix - M.povms[a, x]) >= -1e-6


@settings(max_examples=6)
@given(st.integers(0, 2**31 - 1))
def test_sr_lower_bounds_ir_of_measurements(seed):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(4, r)
    M = _random_qubit_measurements(seed + 1)
    A = q.assemblage_from_state(rho, M)
    ir = incompat.incompatibility_robustness(M).value
    assert steering.consistent_steering_robustness(A).value <= ir + 1e-6
    assert steering.steering_robustness(A).value <= ir + 1e-6


def test_rejects_non_square():
    with pytest.raises(ValueError):
        incompat.incompatibility_robustness(np.zeros((2, 2, 2, 3)))
