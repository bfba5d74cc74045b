import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellgamma import circuit, noise, score
from bellgamma.circuit import CONFIG_LABELS
from bellgamma.outcomes import OUTCOME_LABELS, OutcomeDistribution

from conftest import sessions_for

ROOT2 = np.sqrt(2)


def _delta(label):
    v = np.zeros(16)
    v[int(label, 2)] = 1
    return OutcomeDistribution(v)


def random_quasi_data(rng, spread=0.3):
    """Twelve normalized vectors with some negative entries."""
    dists = {}
    for xz in CONFIG_LABELS:
        v = rng.dirichlet(np.ones(16)) + spread * rng.standard_normal(16) / 16
        v += (1 - v.sum()) / 16
        dists[xz] = v
    return score.ExperimentData(dists, method="inversion")


# -- conditional_correlator -----------------------------------------------------------------


def test_correlator_ideal_config_11():
    # P(b) <Z x (Z + X)/sqrt2> on Phi+ = (1/4)(1/sqrt2); twelve such terms make T_b = 6 sqrt2 / 4
    d = circuit.ideal_distribution("11")
    assert score.conditional_correlator(d, "00") == pytest.approx(ROOT2 / 8, abs=1e-12)


@pytest.mark.parametrize("b", score.B_LABELS)
def test_correlator_uniform_is_zero(b):
    assert score.conditional_correlator(np.full(16, 1 / 16), b) == pytest.approx(0, abs=1e-15)


def test_correlator_delta():
    d = _delta("0000")
    assert score.conditional_correlator(d, "00") == 1
    assert score.conditional_correlator(d, "01") == 0
    assert score.conditional_correlator(_delta("1000"), "00") == -1
    assert score.conditional_correlator(_delta("1011"), "01") == 1


def test_correlator_validation():
    with pytest.raises(ValueError):
        score.conditional_correlator(np.full(16, 0.1), "00")
    with pytest.raises(ValueError):
        score.conditional_correlator(np.full(16, 1 / 16), "2")


# -- t_score -------------------------------------------------------------------------------


@pytest.mark.parametrize("b", score.B_LABELS)
def test_t_ideal(ideal_data, b):
    assert score.t_score(ideal_data, b) == pytest.approx(6 * ROOT2 / 4, abs=1e-12)


@pytest.mark.parametrize("b", score.B_LABELS)
def test_t_uniform(uniform_data, b):
    assert score.t_score(uniform_data, b) == pytest.approx(0, abs=1e-15)


def test_t_single_config():
    dists = {xz: np.full(16, 1 / 16) for xz in CONFIG_LABELS}
    dists["11"] = circuit.ideal_distribution("11")
    assert score.t_score(dists, "00") == pytest.approx(ROOT2 / 8, abs=1e-12)


def test_t_missing_config():
    dists = {xz: np.full(16, 1 / 16) for xz in CONFIG_LABELS[:-1]}
    with pytest.raises(ValueError, match="36"):
        score.t_score(dists, "00")


@pytest.mark.parametrize(
    "xz, b, sign",
    [
        ("11", "00", 1), ("11", "01", -1), ("11", "10", 1),
        ("21", "10", -1), ("22", "00", -1), ("22", "10", 1),
        ("33", "00", -1), ("33", "11", -1), ("34", "01", -1),
        ("35", "10", 1), ("36", "11", 1), ("26", "10", -1),
    ],
)
def test_term_signs(xz, b, sign):
    # isolate one term: that setting carries a delta with a = c = +1 at b
    dists = {k: np.full(16, 1 / 16) for k in CONFIG_LABELS}
    dists[xz] = _delta("0" + b + "0")
    assert score.t_score(dists, b) == sign


# -- weight tensor ----------------------------------------------------------------------------


def test_weights_are_signs():
    w = score.weight_tensor()
    assert w.shape == (16, 12)
    assert set(np.unique(w)) == {-1, 1}


def test_weight_examples():
    w = score.weight_tensor()
    j = CONFIG_LABELS.index
    assert w[0, j("11")] == 1
    assert w[OUTCOME_LABELS.index("1000"), j("11")] == -1
    assert w[OUTCOME_LABELS.index("0010"), j("11")] == -1
    assert w[OUTCOME_LABELS.index("0100"), j("22")] == 1


def test_weights_pair_against_ideal_probabilities(ideal_data):
    # positive weight on the likely outcomes, negative on the unlikely ones
    w = score.weight_tensor()
    m = ideal_data.matrix()
    assert np.all((m > 1 / 16) == (w > 0))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_decomposition_identity(seed):
    data = random_quasi_data(np.random.default_rng(seed))
    assert score.gamma_from_weights(data) == pytest.approx(
        sum(score.t_score(data, b) for b in score.B_LABELS), abs=1e-10
    )


# -- gamma --------------------------------------------------------------------------------------


def test_gamma_ideal(ideal_data):
    rep = score.gamma(ideal_data)
    assert rep.gamma == pytest.approx(6 * ROOT2, abs=1e-9)
    assert rep.gamma == pytest.approx(score.IDEAL_GAMMA, abs=1e-12)
    assert set(rep.s) == set(CONFIG_LABELS)
    assert all(set(v) == set(score.B_LABELS) for v in rep.s.values())


def test_gamma_uniform(uniform_data):
    assert score.gamma(uniform_data).gamma == pytest.approx(0, abs=1e-14)


def test_gamma_sampled_ideal():
    dists = {
        xz: noise.sample_counts(circuit.ideal_distribution(xz), 32000, (11, int(xz))).frequencies()
        for xz in CONFIG_LABELS
    }
    assert score.gamma(dists).gamma == pytest.approx(8.486, abs=0.05)


def test_unsigned_correlator_cannot_reach_ideal(ideal_data):
    # summing probabilities without the a*c sign gives P(b | xz) = 1/4 per term
    unsigned = 0.0
    for b in score.B_LABELS:
        b1, b2 = int(b[0]), int(b[1])
        for xz in CONFIG_LABELS:
            p = ideal_data.distributions[xz].values.reshape(2, 2, 2, 2)[:, b1, b2, :].sum()
            unsigned += score._term_sign(xz, b1, b2) * p
    assert abs(unsigned) < 1e-12


def test_report_fields(ideal_data):
    rep = score.gamma(ideal_data, metadata={"seed": 3})
    assert rep.method == "uncorrected"
    assert rep.metadata["seed"] == 3
    assert sum(rep.t.values()) == pytest.approx(rep.gamma, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_scale_bound(seed):
    rng = np.random.default_rng(seed)
    data = score.ExperimentData({xz: rng.dirichlet(np.ones(16) * 0.2) for xz in CONFIG_LABELS})
    assert abs(score.gamma(data).gamma) <= 12 + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_flipping_a_negates_correlators(seed):
    data = random_quasi_data(np.random.default_rng(seed))
    flip = [int(format(i ^ 0b1000, "04b"), 2) for i in range(16)]
    flipped = score.ExperimentData({xz: d.values[flip] for xz, d in data.distributions.items()})
    a, b = score.gamma(data), score.gamma(flipped)
    for xz in CONFIG_LABELS:
        for bb in score.B_LABELS:
            assert b.s[xz][bb] == pytest.approx(-a.s[xz][bb], abs=1e-12)
    assert b.gamma == pytest.approx(-a.gamma, abs=1e-10)


def test_experiment_data_validation():
    with pytest.raises(ValueError):
        score.ExperimentData({xz: np.full(16, 1 / 16) for xz in CONFIG_LABELS}, method="magic")
    with pytest.raises(ValueError):
        score.ExperimentData({xz: np.full(8, 1 / 8) for xz in CONFIG_LABELS})
    with pytest.raises(ValueError):
        score.ExperimentData({xz: np.full(16, 0.1) for xz in CONFIG_LABELS})


# -- standard error -------------------------------------------------------------------------------


def test_standard_error_matches_spread():
    observed = {xz: circuit.ideal_distribution(xz) for xz in CONFIG_LABELS}
    se = score.gamma_standard_error(observed, 2000)
    draws = [
        score.gamma(
            {xz: noise.sample_counts(observed[xz], 2000, (s, int(xz))).frequencies() for xz in CONFIG_LABELS}
        ).gamma
        for s in range(400)
    ]
    assert np.std(draws, ddof=1) == pytest.approx(se, rel=0.12)


def test_standard_error_noiseless_32000():
    observed = {xz: circuit.ideal_distribution(xz) for xz in CONFIG_LABELS}
    # Gamma = 12 * mean of +-1 weights, each setting's weight has mean 1/sqrt2
    expect = np.sqrt(12 * (1 - 0.5) / 32000)
    assert score.gamma_standard_error(observed, 32000) == pytest.approx(expect, rel=1e-12)


# -- aggregation --------------------------------------------------------------------------------


def test_aggregate_lima_optimization():
    agg = score.aggregate(sessions_for("ibmq_lima", ["2022-04-15", "2022-04-19", "2022-04-24"]))
    assert agg.mean == pytest.approx(7.680, abs=0.001)
    assert agg.sigma == pytest.approx(0.041, abs=0.002)


def test_aggregate_lagos_april_reproduces_summary():
    agg = score.aggregate(sessions_for("ibm_lagos", ["2022-04-12", "2022-04-19", "2022-04-24"]))
    assert agg.mean == pytest.approx(8.046, abs=0.0005)
    assert agg.sigma == pytest.approx(0.065, abs=0.0005)


def test_aggregate_lagos_october():
    agg = score.aggregate(sessions_for("ibm_lagos", ["2022-09-28", "2022-10-02", "2022-10-09"]))
    assert agg.mean == pytest.approx(8.115, abs=0.005)
    assert agg.sigma == pytest.approx(0.042, abs=0.005)
    assert len(agg.selected) == 9


def test_aggregate_equal_values():
    agg = score.aggregate([[7.5, 7.5, 7.5]])
    assert agg.mean == 7.5 and agg.sigma == 0


def test_even_session_takes_lower_middle():
    assert score.select_session([4.0, 1.0, 3.0, 2.0]) == [1.0, 2.0, 4.0]
    assert score.select_session([5, 1, 3]) == [1, 3, 5]


def test_selected_values_come_from_sessions():
    sessions = sessions_for("ibm_lagos", ["2022-09-28", "2022-10-02", "2022-10-09"])
    agg = score.aggregate(sessions)
    for k, sess in enumerate(sessions):
        assert all(v in sess for v in agg.selected[3 * k: 3 * k + 3])
    assert agg.mean == pytest.approx(np.mean(agg.selected))
    assert agg.sigma == pytest.approx(np.std(agg.selected, ddof=1))


def test_aggregate_errors():
    with pytest.raises(ValueError):
        score.aggregate([[1.0, 2.0]])
    with pytest.raises(ValueError):
        score.aggregate([])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.floats(0, 12), min_size=3, max_size=8), min_size=1, max_size=4), st.randoms())
def test_aggregate_order_invariant(sessions, rnd):
    shuffled = [rnd.sample(s, len(s)) for s in sessions]
    a, b = score.aggregate(sessions), score.aggregate(shuffled)
    assert a.selected == b.selected
    assert a.mean == b.mean and a.sigma == b.sigma
