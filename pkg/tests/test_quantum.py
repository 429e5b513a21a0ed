import itertools
import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from diquant import linalg
from diquant import quantum as q
from diquant.quantum import io

SQ2 = np.sqrt(2)


def _brute_local_bound(f):
    """Maximum over both parties' deterministic strategies (independent of the library's Bob-side shortcut)."""
    n_a, n_b, n_x, n_y = f.coeffs.shape
    best = -np.inf
    for la in itertools.product(range(n_a), repeat=n_x):
        for lb in itertools.product(range(n_b), repeat=n_y):
            P = q.local_deterministic_correlation(la, lb, n_a, n_b)
            best = max(best, q.bell_value(f, P))
    return best


@pytest.mark.parametrize("name,expected", [("chsh", 2.0), ("ch", 0.0), ("elegant", 6.0),
                                           ("i3322", 0.0), ("i2233", 2.0)])
def test_local_bounds(name, expected):
    f = q.functional(name)
    assert f.local_bound == pytest.approx(expected)
    assert _brute_local_bound(f) == pytest.approx(expected)


def test_tsirelson_value_of_chsh_settings():
    P = q.born_correlation(q.isotropic_state(2, 1.0), list(q.chsh_settings()))
    assert q.bell_value(q.chsh(), P) == pytest.approx(2 * SQ2)
    assert q.max_chsh(P) == pytest.approx(2 * SQ2)


def test_elegant_quantum_value():
    P = q.born_correlation(q.isotropic_state(2, 1.0), list(q.elegant_settings()))
    assert q.bell_value(q.elegant(), P) == pytest.approx(4 * np.sqrt(3))


def test_ch_optimal_settings_on_maximally_entangled_state():
    P = q.born_correlation(q.pure_partially_entangled(np.pi / 4), list(q.ch_settings(np.pi / 4)))
    assert q.bell_value(q.ch(), P) == pytest.approx((SQ2 - 1) / 2)


@pytest.mark.parametrize("theta", [np.pi / 16, np.pi / 8, np.pi / 5])
def test_ch_settings_violate_for_entangled_pure_states(theta):
    P = q.born_correlation(q.pure_partially_entangled(theta), list(q.ch_settings(theta)))
    assert q.bell_value(q.ch(), P) > 1e-6


def test_seesaw_reaches_known_maxima():
    res = q.seesaw_optimize(q.i3322(), q.isotropic_state(2, 1.0), restarts=5)
    assert res.value == pytest.approx(0.25, abs=1e-8)
    assert np.all(np.diff(res.history) >= -1e-10)
    # CGLMP on the maximally entangled qutrit pair: 2.8729
    res3 = q.seesaw_optimize(q.i2233(), q.isotropic_state(3, 1.0), restarts=5)
    assert res3.value == pytest.approx(2.8729, abs=1e-4)


def test_seesaw_is_reproducible():
    a = q.seesaw_optimize(q.chsh(), q.isotropic_state(2, 0.9), restarts=3, seed=7)
    b = q.seesaw_optimize(q.chsh(), q.isotropic_state(2, 0.9), restarts=3, seed=7)
    assert a.value == b.value
    assert np.array_equal(a.alice.povms, b.alice.povms)
    assert a.value == pytest.approx(0.9 * 2 * SQ2, abs=1e-8)


def test_pr_box():
    P = q.pr_box()
    P.validate()
    # the PR box reaches 4 on a relabelled CHSH expression
    assert q.max_chsh(P) == pytest.approx(4.0)
    A = q.pr_box_assemblage(np.eye(2) / 2)
    A.validate()


def test_isotropic_state_bounds():
    with pytest.raises(ValueError):
        q.isotropic_state(2, 1.5)
    rho = q.isotropic_state(3, -1 / 8)
    assert linalg.is_psd(rho)


@given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0))
def test_born_correlations_are_valid(seed, v):
    r = np.random.default_rng(seed)
    alice = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((2, 3))])
    bob = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((3, 3))])
    P = q.born_correlation(q.isotropic_state(2, v), [alice, bob])
    P.validate()
    assert q.max_chsh(q.Correlation(P.table[..., :2])) <= 2 * SQ2 * v + 1e-9


@given(st.integers(0, 2**31 - 1))
def test_assemblage_marginals_match_correlation(seed):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(4, r)
    alice = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((2, 3))])
    bob = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((2, 3))])
    A = q.assemblage_from_state(rho, alice).validate()
    P = q.born_correlation(rho, [alice, bob])
    from_assemblage = np.einsum("axij,byji->abxy", A.rho, bob.povms).real
    assert np.allclose(from_assemblage, P.table)


def test_signalling_assemblage_rejected():
    rho = np.zeros((2, 2, 2, 2), dtype=complex)
    rho[0, 0] = np.diag([1.0, 0.0])
    rho[1, 1] = np.diag([0.0, 1.0])
    with pytest.raises(q.ValidationError):
        q.Assemblage(rho).validate()


def test_signalling_correlation_rejected():
    t = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product(range(2), repeat=2):
        t[y, 0, x, y] = 1.0  # Alice's outcome copies Bob's input
    with pytest.raises(q.ValidationError):
        q.Correlation(t).validate()


def test_tripartite_assemblage_from_state_validates(rng):
    rho = linalg.random_density(8, rng)
    alice, bob = q.chsh_settings()
    T = q.tripartite_assemblage_from_state(rho, alice, bob)
    T.validate()
    assert T.marginal_ab().table.sum(axis=(0, 1)) == pytest.approx(np.ones((2, 2)))


# JSON interchange

def _round_trip(obj):
    return io.from_json(json.loads(json.dumps(io.to_json(obj))))


@given(st.integers(0, 2**31 - 1))
def test_json_round_trip_correlation_and_assemblage(seed):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(4, r)
    alice = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((2, 3))])
    P = q.born_correlation(rho, [alice, alice])
    A = q.assemblage_from_state(rho, alice)
    assert np.array_equal(_round_trip(P).table, P.table)
    assert np.array_equal(_round_trip(A).rho, A.rho)
    assert np.array_equal(_round_trip(alice).povms, alice.povms)


def test_json_round_trip_functional_scenario_state_tripartite(rng):
    f = q.elegant()
    g = _round_trip(f)
    assert np.array_equal(g.coeffs, f.coeffs) and g.name == f.name
    s = q.Scenario.bipartite(3, 3, 2, 2)
    assert _round_trip(s) == s
    rho = q.isotropic_state(2, 0.3)
    back, dims = io.from_json(io.state_to_json(rho, (2, 2)))
    assert np.array_equal(back, rho) and dims == (2, 2)
    T = q.pr_box_assemblage(np.eye(2) / 2)
    assert np.array_equal(_round_trip(T).rho, T.rho)


def test_json_schema_violations():
    with pytest.raises(jsonschema.ValidationError):
        io.from_json({"type": "correlation", "version": 1})
    with pytest.raises(jsonschema.ValidationError):
        io.from_json({"type": "nonsense"})
    doc = io.to_json(q.pr_box())
    doc["table"] = "not a table"
    with pytest.raises(jsonschema.ValidationError):
        io.from_json(doc)


def test_file_dump_and_load(tmp_path):
    P = q.pr_box()
    io.dump(P, tmp_path / "pr.json")
    assert np.array_equal(io.load(tmp_path / "pr.json").table, P.table)
