"""Analytics contracts against independent brute-force oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossrisk.analytics import (
    RiskParams,
    SignalSet,
    SignalWeights,
    aggregate_cov,
    aggregate_signal,
    aggregate_v,
    covariance_matrix,
    log_return,
    risk_metric,
    rolling_volatility,
    zscore,
)
from crossrisk.errors import (
    InsufficientHistory,
    KeyMismatch,
    MisalignedWindows,
    NonPositivePrice,
    NotSymmetric,
)


# --- independent oracles (plain Python, no shared code paths) ---------------

def naive_std(values):
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))


def naive_cov(xs, ys):
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    return sum((a - mx) * (b - my) for a, b in zip(xs, ys)) / (len(xs) - 1)


def test_log_return_examples():
    assert log_return(100.0, 100.0) == 0.0
    assert log_return(100.0, 200.0) == pytest.approx(math.log(2), abs=1e-12)
    assert log_return(200.0, 100.0) == pytest.approx(-math.log(2), abs=1e-12)
    with pytest.raises(NonPositivePrice):
        log_return(0.0, 100.0)


def test_rolling_volatility_constant_is_zero():
    assert rolling_volatility([0.01] * 10, 5) == 0.0


def test_rolling_volatility_two_point_example():
    # sample std of [0.01, -0.01]: sqrt(2 * 0.01^2 / 1)
    expected = math.sqrt(2 * 0.01 ** 2)
    assert rolling_volatility([0.01, -0.01], 2) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.0141421356, abs=1e-9)


def test_rolling_volatility_matches_naive_oracle():
    rng = np.random.default_rng(7)
    returns = rng.normal(0, 0.02, size=1000).tolist()
    got = rolling_volatility(returns, 30)
    assert got == pytest.approx(naive_std(returns[-30:]), abs=1e-12)


def test_rolling_volatility_needs_two_points():
    with pytest.raises(InsufficientHistory):
        rolling_volatility([0.01], 30)


def test_rolling_volatility_translation_and_scaling():
    rng = np.random.default_rng(11)
    returns = rng.normal(0, 0.01, size=60).tolist()
    base = rolling_volatility(returns, 30)
    shifted = rolling_volatility([r + 0.5 for r in returns], 30)
    scaled = rolling_volatility([-3.0 * r for r in returns], 30)
    assert shifted == pytest.approx(base, abs=1e-12)
    assert scaled == pytest.approx(3.0 * base, rel=1e-12)


def test_covariance_diagonal_is_variance():
    rng = np.random.default_rng(3)
    x = rng.normal(size=30).tolist()
    cov = covariance_matrix({"a": x, "b": [v * 2 for v in x]})
    assert cov[0, 0] == pytest.approx(naive_cov(x, x), abs=1e-12)


def test_covariance_antisymmetric_pair():
    rng = np.random.default_rng(4)
    x = rng.normal(size=25).tolist()
    y = [-v for v in x]
    cov = covariance_matrix({"x": x, "y": y})
    assert cov[0, 1] == pytest.approx(-cov[0, 0], abs=1e-12)


def test_covariance_matches_double_loop_oracle():
    rng = np.random.default_rng(5)
    windows = {f"i{k}": rng.normal(0, 0.03, size=30).tolist() for k in range(5)}
    ids = sorted(windows)
    cov = covariance_matrix(windows)
    for a, ida in enumerate(ids):
        for b, idb in enumerate(ids):
            assert cov[a, b] == pytest.approx(naive_cov(windows[ida], windows[idb]), abs=1e-9)
    assert np.allclose(cov, cov.T)


def test_covariance_is_psd_against_eigen_oracle():
    rng = np.random.default_rng(6)
    for _ in range(25):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(2, 40))
        windows = {f"i{j}": rng.normal(size=n).tolist() for j in range(k)}
        eigvals = np.linalg.eigvalsh(covariance_matrix(windows))
        assert eigvals.min() >= -1e-9


def test_covariance_misaligned_windows():
    with pytest.raises(MisalignedWindows):
        covariance_matrix({"a": [1.0, 2.0, 3.0], "b": [1.0, 2.0]})


def test_aggregate_v_examples():
    w1 = SignalWeights(weights={"a": 1.0})
    assert aggregate_v({"a": 0.17}, w1) == pytest.approx(0.17)
    w2 = SignalWeights(weights={"a": 0.5, "b": 0.5})
    assert aggregate_v({"a": 0.1, "b": 0.3}, w2) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(KeyMismatch):
        aggregate_v({"a": 0.1}, w2)


def test_aggregate_v_random_weighted_sum_oracle():
    rng = np.random.default_rng(8)
    ids = [f"i{k}" for k in range(6)]
    raw = rng.random(6)
    weights = SignalWeights(weights=dict(zip(ids, (raw / raw.sum()).tolist())))
    vols = dict(zip(ids, rng.random(6).tolist()))
    expected = sum(weights.weights[i] * vols[i] for i in ids)
    assert aggregate_v(vols, weights) == pytest.approx(expected, abs=1e-12)


def test_aggregate_cov_examples():
    assert aggregate_cov(np.array([[1.0, 0.3], [0.3, 2.0]])) == pytest.approx(0.3)
    assert aggregate_cov(np.diag([1.0, 2.0, 3.0])) == 0.0
    with pytest.raises(NotSymmetric):
        aggregate_cov(np.array([[1.0, 0.5], [0.1, 1.0]]))


def test_aggregate_cov_off_diagonal_mean_oracle():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(4, 4))
    sym = (a + a.T) / 2
    expected = sum(
        sym[i, j] for i in range(4) for j in range(4) if i != j
    ) / 12
    assert aggregate_cov(sym) == pytest.approx(expected, abs=1e-12)


def test_risk_metric_isolates_terms():
    assert risk_metric(0.2, 0.5, RiskParams(beta1=1.0, beta2=0.0)).r == pytest.approx(0.2)
    assert risk_metric(0.7, -0.05, RiskParams(beta1=0.0, beta2=1.0)).r == pytest.approx(-0.05)
    rv = risk_metric(0.2, 0.05, RiskParams(beta1=1.0, beta2=1.0))
    assert rv.r == pytest.approx(0.25)
    assert rv.r == rv.volatility_term * 1.0 + rv.covariance_term * 1.0


def test_risk_metric_identity_bit_for_bit():
    rng = np.random.default_rng(10)
    for _ in range(200):
        v = float(rng.random())
        cov = float(rng.normal())
        b1 = float(rng.random() * 3)
        b2 = float(rng.random() * 3)
        rv = risk_metric(v, cov, RiskParams(beta1=b1, beta2=b2))
        assert rv.r == b1 * v + b2 * cov  # exact float equality


@given(
    st.floats(min_value=0.0, max_value=5.0),
    st.floats(min_value=0.0, max_value=5.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=0.5),
)
@settings(max_examples=200)
def test_risk_metric_monotone_in_components(b1, b2, v, cov, bump):
    params = RiskParams(beta1=b1, beta2=b2)
    base = risk_metric(v, cov, params).r
    assert risk_metric(v + bump, cov, params).r >= base
    assert risk_metric(v, cov + bump, params).r >= base


def test_aggregate_signal_examples():
    w = SignalWeights(weights={"a": 1.0})
    one = SignalSet(values={"a": 0.42})
    assert aggregate_signal(one, w) == pytest.approx(0.42)

    w2 = SignalWeights(weights={"a": 0.5, "b": 0.5})
    sym = SignalSet(values={"a": 0.3, "b": -0.3})
    assert aggregate_signal(sym, w2) == pytest.approx(0.0, abs=1e-15)


def test_aggregate_signal_ten_random_oracle():
    rng = np.random.default_rng(12)
    ids = [f"s{k}" for k in range(10)]
    raw = rng.random(10)
    weights = SignalWeights(weights=dict(zip(ids, (raw / raw.sum()).tolist())))
    signals = SignalSet(values=dict(zip(ids, rng.normal(size=10).tolist())))
    expected = sum(weights.weights[i] * signals.values[i] for i in ids)
    assert aggregate_signal(signals, weights) == pytest.approx(expected, abs=1e-12)


def test_aggregates_are_linear_in_values():
    rng = np.random.default_rng(13)
    ids = [f"s{k}" for k in range(5)]
    weights = SignalWeights.uniform(ids)
    x = dict(zip(ids, rng.normal(size=5).tolist()))
    y = dict(zip(ids, rng.normal(size=5).tolist()))
    a, b = 1.7, -0.4
    combo = SignalSet(values={i: a * x[i] + b * y[i] for i in ids})
    expected = a * aggregate_signal(SignalSet(values=x), weights) + b * aggregate_signal(
        SignalSet(values=y), weights
    )
    assert aggregate_signal(combo, weights) == pytest.approx(expected, abs=1e-12)


def test_zscore_flat_window_is_zero():
    assert zscore([1.0, 1.0, 1.0]) == 0.0
    vals = [1.0, 2.0, 3.0, 4.0, 10.0]
    expected = (10.0 - sum(vals) / 5) / naive_std(vals)
    assert zscore(vals) == pytest.approx(expected, abs=1e-12)
