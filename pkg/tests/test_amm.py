import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diquant import amm, linalg, steering
from diquant import quantum as q
from diquant.amm import OperatorWord, enumerate_words, reduce_word

SQ2 = np.sqrt(2)


def chsh_family(v):
    return q.born_correlation(q.isotropic_state(2, v), list(q.chsh_settings()))


def chsh_sr_curve(v):
    return max(0.0, (SQ2 * v - 1) * (SQ2 - 1))


# words and templates

def test_projective_reduction_rules():
    assert reduce_word(((0, 0), (0, 0))) == OperatorWord(((0, 0),))
    assert reduce_word(((0, 0), (0, 1))) is None
    assert reduce_word(((0, 0), (1, 0), (1, 0), (0, 0))) == OperatorWord(((0, 0), (1, 0), (0, 0)))


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_word_count_two_binary_settings(level):
    # alternating words over two letters: 1 + 2 per length
    assert len(enumerate_words(2, 2, level)) == 1 + 2 * level


def test_word_cap():
    with pytest.raises(OverflowError):
        enumerate_words(4, 3, 5)


@settings(max_examples=10)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_template_instantiation_agrees_with_operators(seed, level):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(4, r)
    blochs = [v / np.linalg.norm(v) for v in r.standard_normal((2, 3))]
    alice = q.qubit_measurements(blochs)
    bob = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((2, 3))])
    A = q.assemblage_from_state(rho, alice)
    t = amm.AmmTemplate(2, 2, level)
    num = amm.instantiate_numeric(t, A, bob)
    sym = amm.instantiate_symbolic(t, A, bob)
    # the template identifies a moment with its reversal, which holds for the real part
    assert np.allclose(num.real, sym.real, atol=1e-10)
    for a in range(2):
        for x in range(2):
            assert linalg.min_eig(num[a, x]) >= -1e-10


def test_template_json_round_trip():
    t = amm.AmmTemplate(3, 2, 2)
    data = json.loads(t.dumps())
    assert amm.AmmTemplate.from_json(data).to_json() == data
    data["entries"][0][0]["kind"] = "Unknown"
    with pytest.raises(ValueError):
        amm.AmmTemplate.from_json(data)


def test_template_entry_kinds():
    t = amm.AmmTemplate(2, 2, 1)
    assert t.kind(0, 0) == "Normalization"
    assert t.kind(0, 1) == "Probability"
    assert t.kind(1, 2) == "Unknown"


# device-independent bounds

@pytest.mark.parametrize("level", [1, 2])
@pytest.mark.parametrize("v", [0.75, 0.85, 1.0])
def test_sr_di_on_chsh_family(level, v):
    assert amm.sr_di(chsh_family(v), level).value == pytest.approx(chsh_sr_curve(v), abs=1e-6)


def test_sr_di_zero_on_local_data():
    P = chsh_family(0.6)
    assert amm.sr_di(P, 1).value == pytest.approx(0.0, abs=1e-7)
    assert amm.subchannel_advantage(P, 1)[0] == pytest.approx(1.0, abs=1e-7)


def test_subchannel_advantage_is_sr_di_plus_one():
    P = chsh_family(1.0)
    adv, bound = amm.subchannel_advantage(P, 2)
    assert adv == bound.value + 1.0
    assert adv == pytest.approx(1 + (SQ2 - 1) ** 2, abs=1e-6)


def test_subchannel_advantage_monotone_in_violation():
    vals = [amm.subchannel_advantage(chsh_family(v), 1)[0] for v in np.linspace(0.7, 1.0, 5)]
    assert np.all(np.diff(vals) >= -1e-7)


def _random_quantum_instance(seed):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(4, r, rank=1 + seed % 2)
    alice = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((2, 3))])
    bob = q.qubit_measurements([v / np.linalg.norm(v) for v in r.standard_normal((2, 3))])
    return q.assemblage_from_state(rho, alice), q.born_correlation(rho, [alice, bob])


@settings(max_examples=6)
@given(st.integers(0, 2**31 - 1))
def test_di_bounds_are_sound_and_monotone(seed):
    A, P = _random_quantum_instance(seed)
    sr = steering.steering_robustness(A).value
    src = steering.consistent_steering_robustness(A).value
    sw = steering.steerable_weight(A).value
    b1, b2 = amm.sr_di(P, 1).value, amm.sr_di(P, 2).value
    assert b1 <= b2 + 1e-6
    assert b2 <= sr + 1e-6
    c2 = amm.sr_di_consistent(P, 2).value
    assert b2 <= c2 + 1e-6
    assert c2 <= src + 1e-6
    w1, w2 = amm.sw_di(P, 1).value, amm.sw_di(P, 2).value
    assert w1 <= w2 + 1e-6
    assert w2 <= sw + 1e-6


def test_sr_di_bell_relaxes_full_data():
    P = chsh_family(0.9)
    t = q.bell_value(q.chsh(), P)
    from_value = amm.sr_di_bell(q.chsh(), t, level=1)
    assert from_value.feasible
    assert from_value.value <= amm.sr_di(P, 1).value + 1e-6
    assert from_value.value == pytest.approx(chsh_sr_curve(0.9), abs=1e-5)
    table = np.array(from_value.certificate["correlation"])
    assert q.bell_value(q.chsh(), table) == pytest.approx(t, abs=1e-6)


def test_sr_di_bell_above_quantum_bound_is_infeasible():
    res = amm.sr_di_bell(q.chsh(), 3.5, level=1)
    assert not res.feasible
    assert np.isnan(res.value)
    with pytest.raises(ValueError):
        amm.sr_di_bell(q.chsh(), 4.5, level=1)


# tripartite post-quantum steering

def test_pr_assemblage_passes_tripartite_amm():
    A = q.pr_box_assemblage(np.eye(2) / 2)
    for level in (1, 2):
        ok, cert = amm.tripartite_amm_feasible(A, level)
        assert ok, cert["margin"]


def test_ghz_assemblage_passes():
    ghz = np.zeros(8)
    ghz[[0, 7]] = 1 / SQ2
    alice, bob = q.chsh_settings()
    T = q.tripartite_assemblage_from_state(linalg.proj(ghz), alice, bob)
    assert amm.tripartite_amm_feasible(T, 1)[0]


def test_signalling_tripartite_correlation_fails():
    t = np.zeros((2, 2, 2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for z in range(2):
                t[z, 0, 0, x, y, z] = 1.0  # Alice outputs Charlie's input
    ok, _ = amm.tripartite_amm_feasible(q.Correlation(t), 1)
    assert not ok
