"""Backtest engine: simulation oracles, metric hand-checks, drawdown
and AUC brute-force oracles, aggregation, and the Welch test against a
reference implementation."""

import numpy as np
import pytest
import scipy.stats

from qamm.backtest import (
    BacktestReport,
    StrategySpec,
    aggregate_runs,
    metrics,
    rank_auc,
    simulate,
    welch_t_test,
)
from qamm.errors import (
    ConfigError,
    DegenerateCurve,
    EmptyWindow,
    MisalignedSignals,
    TooFewRuns,
    ZeroVariancePair,
)


def rebalance_oracle(prices, signals, w_base=0.5, fee_bps=0.0, v0=10_000.0):
    """Track the two legs explicitly, value by value."""
    base_value = w_base * v0
    quote_value = (1.0 - w_base) * v0
    out = []
    prev_p = prices[0]
    for p, s in zip(prices, signals):
        base_value *= p / prev_p
        prev_p = p
        total = base_value + quote_value
        if s:
            traded = abs(w_base * total - base_value)
            total -= fee_bps / 1e4 * traded
            base_value = w_base * total
            quote_value = (1.0 - w_base) * total
        out.append(base_value + quote_value)
    return np.array(out)


def pair_auc_oracle(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def dummy_report(**overrides) -> BacktestReport:
    base = dict(total_return=10.0, sharpe=1.5, max_drawdown=0.25, calmar=2.0,
                volatility=0.125, rebalance_count=4, accuracy=0.75,
                precision=0.5, recall=0.5, f1=0.5, auc=0.625)
    base.update(overrides)
    return BacktestReport(**base)


# ---------------------------------------------------------------------------
# Simulation


def test_flat_price_no_signals_is_constant():
    curve = simulate(np.full(20, 50.0), np.zeros(20, dtype=int))
    assert np.array_equal(curve.values, np.full(20, 10_000.0))


def test_price_doubles_buy_and_hold():
    prices = np.linspace(100.0, 200.0, 30)
    curve = simulate(prices, np.zeros(30, dtype=int))
    assert curve.values[-1] == pytest.approx(15_000.0, rel=1e-12)


def test_buy_and_hold_tracks_half_the_price_path():
    rng = np.random.default_rng(0)
    prices = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.02, 40)))
    curve = simulate(prices, np.zeros(40, dtype=int))
    expect = 5_000.0 * prices / prices[0] + 5_000.0
    assert np.abs(curve.values - expect).max() < 1e-9


def test_daily_rebalance_matches_oracle():
    rng = np.random.default_rng(1)
    for trial in range(10):
        prices = 80.0 * np.exp(np.cumsum(rng.normal(0.001, 0.03, 60)))
        signals = np.ones(60, dtype=int)
        curve = simulate(prices, signals)
        # closed form: each rebalance multiplies equity by (1 + w_base * r_t)
        r = prices[1:] / prices[:-1] - 1.0
        closed = 10_000.0 * np.concatenate(([1.0], np.cumprod(1.0 + 0.5 * r)))
        assert np.abs(curve.values / closed - 1.0).max() < 1e-10
        hand = rebalance_oracle(prices, signals)
        assert np.abs(curve.values / hand - 1.0).max() < 1e-10


def test_sparse_signals_match_oracle_with_fees():
    rng = np.random.default_rng(2)
    for trial in range(10):
        n = 50
        prices = 120.0 * np.exp(np.cumsum(rng.normal(0, 0.04, n)))
        signals = (rng.random(n) < 0.3).astype(int)
        fee = float(rng.choice([0.0, 5.0, 30.0]))
        curve = simulate(prices, signals, StrategySpec(fee_bps=fee))
        hand = rebalance_oracle(prices, signals, fee_bps=fee)
        assert np.abs(curve.values / hand - 1.0).max() < 1e-10


def test_fee_monotonicity():
    rng = np.random.default_rng(3)
    prices = 90.0 * np.exp(np.cumsum(rng.normal(0, 0.05, 45)))
    signals = (rng.random(45) < 0.4).astype(int)
    finals = [simulate(prices, signals, StrategySpec(fee_bps=f)).values[-1]
              for f in (0.0, 1.0, 10.0, 100.0)]
    assert all(a >= b for a, b in zip(finals, finals[1:]))


def test_rebalance_flags_and_alignment():
    prices = np.array([10.0, 11.0, 12.0])
    curve = simulate(prices, [0, 1, 0])
    assert curve.rebalanced.tolist() == [False, True, False]
    with pytest.raises(MisalignedSignals):
        simulate(prices, [0, 1])
    with pytest.raises(EmptyWindow):
        simulate(np.array([]), [])


def test_strategy_spec_validation():
    with pytest.raises(ConfigError):
        StrategySpec(base_weight=0.7, quote_weight=0.7)
    with pytest.raises(ConfigError):
        StrategySpec(fee_bps=-1.0)


# ---------------------------------------------------------------------------
# Metrics


def flat_cls(n):
    # filler classifier outputs for trading-metric tests
    y = np.zeros(n, dtype=int)
    y[: n // 2] = 1
    return y, y.copy(), np.linspace(0.1, 0.9, n)


def report_for(values):
    v = np.asarray(values, dtype=np.float64)
    from qamm.backtest import EquityCurve
    curve = EquityCurve(np.arange(len(v)), v, np.zeros(len(v), dtype=bool))
    y, yhat, p = flat_cls(len(v))
    return metrics(curve, yhat, y, p)


def test_total_return_ten_percent():
    rep = report_for([100.0, 110.0])
    assert rep.total_return == pytest.approx(10.0, abs=1e-12)
    assert rep.sharpe is None  # one return, no sample std


def test_monotone_curve_zero_drawdown():
    rep = report_for([100, 101, 103, 108, 120])
    assert rep.max_drawdown == 0.0
    assert rep.calmar is None


def test_hand_scanned_drawdown():
    rep = report_for([100.0, 120.0, 90.0, 105.0])
    assert rep.max_drawdown == pytest.approx(0.25, abs=1e-15)


def test_drawdown_equals_all_pairs_maximum():
    rng = np.random.default_rng(4)
    for trial in range(30):
        v = np.exp(rng.normal(0, 0.1, 50)).cumsum() + 10.0
        rep = report_for(v)
        brute = max((v[i] - v[j]) / v[i] for i in range(50) for j in range(i + 1, 50))
        assert rep.max_drawdown == max(0.0, brute)


def test_sharpe_three_point_hand_check():
    rep = report_for([100.0, 110.0, 104.5])
    r = np.array([0.10, -0.05])
    expect = r.mean() / r.std(ddof=1) * np.sqrt(252.0)
    assert rep.sharpe == pytest.approx(expect, abs=1e-12)
    assert rep.volatility == pytest.approx(r.std(ddof=1) * np.sqrt(252.0), abs=1e-12)


def test_sharpe_sign_matches_mean_return():
    rng = np.random.default_rng(5)
    for trial in range(20):
        v = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.02, 30)))
        rep = report_for(v)
        mu = (v[1:] / v[:-1] - 1.0).mean()
        assert np.sign(rep.sharpe) == np.sign(mu)


def test_flat_curve_sharpe_sentinel():
    rep = report_for([100.0] * 10)
    assert rep.sharpe is None
    assert rep.volatility == 0.0
    with pytest.raises(DegenerateCurve):
        report_for([100.0])


def test_classification_counts():
    from qamm.backtest import EquityCurve
    curve = EquityCurve(np.arange(4), np.array([100.0, 101, 102, 103]),
                        np.zeros(4, dtype=bool))
    y = np.array([1, 1, 0, 0])
    yhat = np.array([1, 0, 1, 0])
    rep = metrics(curve, yhat, y, np.array([0.9, 0.4, 0.6, 0.1]))
    assert rep.accuracy == 0.5
    assert rep.precision == 0.5
    assert rep.recall == 0.5
    assert rep.f1 == 0.5
    assert rep.rebalance_count == 2
    assert rep.auc == pytest.approx(pair_auc_oracle([0.9, 0.4, 0.6, 0.1], y), abs=1e-15)


def test_degenerate_predictions_zero_divisions():
    from qamm.backtest import EquityCurve
    curve = EquityCurve(np.arange(3), np.array([100.0, 101, 99]),
                        np.zeros(3, dtype=bool))
    rep = metrics(curve, np.zeros(3, int), np.array([1, 0, 1]), np.full(3, 0.5))
    assert rep.precision == 0.0 and rep.recall == 0.0 and rep.f1 == 0.0
    assert rep.rebalance_count == 0


def test_auc_extremes_and_ties():
    y = np.array([0, 0, 1, 1])
    assert rank_auc([0.1, 0.2, 0.8, 0.9], y) == 1.0
    assert rank_auc([0.9, 0.8, 0.2, 0.1], y) == 0.0
    assert rank_auc([0.5, 0.5, 0.5, 0.5], y) == 0.5
    assert rank_auc([0.3, 0.3, 0.3, 0.7], y) == pytest.approx(0.75, abs=1e-15)
    assert rank_auc([0.1, 0.2, 0.3, 0.4], np.ones(4, int)) == 0.5


def test_auc_matches_pair_counting_oracle():
    rng = np.random.default_rng(6)
    for trial in range(25):
        n = 50
        y = (rng.random(n) < 0.5).astype(int)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        scores = np.round(rng.random(n), 2)  # coarse grid forces ties
        assert rank_auc(scores, y) == pytest.approx(
            pair_auc_oracle(scores, y), abs=1e-12)


# ---------------------------------------------------------------------------
# Aggregation


def test_identical_reports_zero_std():
    summary = aggregate_runs([dummy_report() for _ in range(5)])
    assert summary.runs == 5
    assert summary.mean["total_return"] == 10.0
    assert all(s == 0.0 for s in summary.std.values())


def test_two_point_aggregate():
    summary = aggregate_runs([dummy_report(total_return=10.0),
                              dummy_report(total_return=12.0)])
    assert summary.mean["total_return"] == pytest.approx(11.0)
    assert summary.std["total_return"] == pytest.approx(np.sqrt(2.0))


def test_fuzzed_aggregate_matches_formula():
    rng = np.random.default_rng(7)
    reports = [dummy_report(total_return=float(rng.normal(10, 2)),
                            sharpe=float(rng.normal(1, 0.3)))
               for _ in range(5)]
    summary = aggregate_runs(reports)
    rets = np.array([r.total_return for r in reports])
    assert summary.mean["total_return"] == pytest.approx(rets.mean(), abs=1e-12)
    assert summary.std["total_return"] == pytest.approx(rets.std(ddof=1), abs=1e-12)


def test_aggregate_drops_none_sentinels():
    reports = [dummy_report(), dummy_report(sharpe=None), dummy_report()]
    summary = aggregate_runs(reports)
    assert summary.mean["sharpe"] == pytest.approx(1.5)
    reports = [dummy_report(sharpe=None), dummy_report(sharpe=None)]
    assert aggregate_runs(reports).mean["sharpe"] is None


def test_too_few_runs():
    with pytest.raises(TooFewRuns):
        aggregate_runs([dummy_report()])


# ---------------------------------------------------------------------------
# Welch test


def test_welch_identical_samples():
    t, p = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert t == 0.0 and p == 1.0
    t, p = welch_t_test([4.0, 4.0], [4.0, 4.0])
    assert t == 0.0 and p == 1.0


def test_welch_extreme_separation():
    a = 1.0 + 1e-9 * np.arange(5)
    b = 2.0 + 1e-9 * np.arange(5)
    t, p = welch_t_test(a, b)
    assert p < 1e-6
    assert t < 0.0


def test_welch_constant_unequal_raises():
    with pytest.raises(ZeroVariancePair):
        welch_t_test([1.0, 1.0, 1.0], [2.0, 2.0, 2.0])
    with pytest.raises(TooFewRuns):
        welch_t_test([1.0], [2.0, 3.0])


def test_welch_matches_reference():
    rng = np.random.default_rng(8)
    for trial in range(40):
        na, nb = int(rng.integers(3, 12)), int(rng.integers(3, 12))
        a = rng.normal(0, 1, na)
        b = rng.normal(rng.normal(0, 1), float(rng.uniform(0.5, 2)), nb)
        t, p = welch_t_test(a, b)
        ref = scipy.stats.ttest_ind(a, b, equal_var=False)
        assert t == pytest.approx(ref.statistic, abs=1e-6)
        assert p == pytest.approx(ref.pvalue, abs=1e-4)
