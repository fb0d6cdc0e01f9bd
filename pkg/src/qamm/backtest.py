"""Signal-driven portfolio simulation and performance statistics.

The strategy: a two-asset book (base asset against a quote stable)
starts at the target weights; whenever the signal fires, holdings are
reset to target at that close and a fee is charged on the traded
notional.  Equity is marked to market at every close.  Metrics cover
both the trading side (return, Sharpe, drawdown) and the classifier
side (accuracy through AUC), plus cross-run aggregation and Welch
significance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

from .errors import (
    ConfigError,
    DegenerateCurve,
    EmptyWindow,
    MisalignedSignals,
    TooFewRuns,
    ZeroVariancePair,
)

TRADING_DAYS = 252.0


@dataclass(frozen=True)
class StrategySpec:
    """Target weights, rebalance fee, and starting capital."""

    base_weight: float = 0.5
    quote_weight: float = 0.5
    fee_bps: float = 0.0
    initial_capital: float = 10_000.0

    def __post_init__(self) -> None:
        if abs(self.base_weight + self.quote_weight - 1.0) > 1e-12:
            raise ConfigError("target weights must sum to 1")
        if min(self.base_weight, self.quote_weight) < 0.0:
            raise ConfigError("target weights must be non-negative")
        if self.fee_bps < 0.0 or self.initial_capital <= 0.0:
            raise ConfigError("fee must be >= 0 and capital > 0")


@dataclass
class EquityCurve:
    timestamps: np.ndarray
    values: np.ndarray
    rebalanced: np.ndarray

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass
class BacktestReport:
    """One run's trading and classification metrics.

    total_return is a percent; volatility and max_drawdown are
    fractions (drawdown stored positive, sign applied at report time).
    sharpe and calmar are None when their denominator is zero.
    """

    total_return: float
    sharpe: float | None
    max_drawdown: float
    calmar: float | None
    volatility: float
    rebalance_count: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_FIELDS}


METRIC_FIELDS = (
    "total_return", "sharpe", "max_drawdown", "calmar", "volatility",
    "rebalance_count", "accuracy", "precision", "recall", "f1", "auc",
)


@dataclass
class MultiRunSummary:
    runs: int
    mean: dict
    std: dict


def simulate(series, signals, spec: StrategySpec = StrategySpec()) -> EquityCurve:
    """Mark-to-market the two-asset book over one test slice.

    series: CandleSeries (close/timestamps used) or a bare close array.
    The book opens at target weights with no fee; each 1-signal resets
    it to target at that close, charging fee_bps on the traded notional.
    """
    prices = np.asarray(getattr(series, "close", series), dtype=np.float64)
    n = prices.shape[0]
    if n == 0:
        raise EmptyWindow("no bars to simulate")
    ts = getattr(series, "ts", None)
    ts = np.arange(n, dtype=np.int64) if ts is None else np.asarray(ts)
    flags = np.asarray(signals).astype(bool)
    if flags.shape[0] != n:
        raise MisalignedSignals(f"{flags.shape[0]} signals for {n} bars")

    fee_rate = spec.fee_bps / 1e4
    base_units = spec.base_weight * spec.initial_capital / prices[0]
    quote = spec.quote_weight * spec.initial_capital
    values = np.empty(n)
    for t in range(n):
        p = prices[t]
        value = base_units * p + quote
        if flags[t]:
            traded = abs(spec.base_weight * value - base_units * p)
            value -= fee_rate * traded
            base_units = spec.base_weight * value / p
            quote = spec.quote_weight * value
        values[t] = value
    return EquityCurve(ts, values, flags)


def rank_auc(scores, labels) -> float:
    """AUC via the midrank statistic; ties count one half, a single
    observed class returns the 0.5 convention."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    n = s.shape[0]
    n_pos = int((y == 1).sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    order = np.argsort(s, kind="stable")
    sorted_s = s[order]
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    pos_rank_sum = float(ranks[y == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def metrics(curve: EquityCurve, signals, labels, probas) -> BacktestReport:
    """All per-run metrics from one curve and its classifier outputs."""
    v = np.asarray(curve.values, dtype=np.float64)
    if v.shape[0] < 2:
        raise DegenerateCurve(f"{v.shape[0]} points")
    r = v[1:] / v[:-1] - 1.0
    mu = float(r.mean())
    # a single return has no sample std; fall through to the sentinel
    sigma = float(r.std(ddof=1)) if r.shape[0] >= 2 else 0.0
    root_days = float(np.sqrt(TRADING_DAYS))
    sharpe = None if sigma == 0.0 else mu / sigma * root_days
    peak = np.maximum.accumulate(v)
    mdd = float(((peak - v) / peak).max())
    ann_return = float((v[-1] / v[0]) ** (TRADING_DAYS / (v.shape[0] - 1)) - 1.0)
    calmar = None if mdd == 0.0 else ann_return / mdd

    yhat = np.asarray(signals).astype(np.int64)
    y = np.asarray(labels).astype(np.int64)
    tp = int(((yhat == 1) & (y == 1)).sum())
    tn = int(((yhat == 0) & (y == 0)).sum())
    fp = int(((yhat == 1) & (y == 0)).sum())
    fn = int(((yhat == 0) & (y == 1)).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0

    return BacktestReport(
        total_return=float((v[-1] - v[0]) / v[0] * 100.0),
        sharpe=sharpe,
        max_drawdown=mdd,
        calmar=calmar,
        volatility=sigma * root_days,
        rebalance_count=int(yhat.sum()),
        accuracy=(tp + tn) / y.shape[0],
        precision=precision,
        recall=recall,
        f1=f1,
        auc=rank_auc(probas, y),
    )


def aggregate_runs(reports: list) -> MultiRunSummary:
    """Per-metric sample mean and std (ddof=1) across runs; None
    sentinels are dropped before averaging."""
    if len(reports) < 2:
        raise TooFewRuns(f"{len(reports)} reports")
    mean: dict = {}
    std: dict = {}
    for name in METRIC_FIELDS:
        vals = np.array(
            [getattr(r, name) for r in reports if getattr(r, name) is not None],
            dtype=np.float64)
        if vals.size == 0:
            mean[name] = None
            std[name] = None
        else:
            mean[name] = float(vals.mean())
            std[name] = float(vals.std(ddof=1)) if vals.size >= 2 else None
    return MultiRunSummary(runs=len(reports), mean=mean, std=std)


def welch_t_test(sample_a, sample_b) -> tuple:
    """Unequal-variance t with Welch-Satterthwaite df, two-sided p.

    Both samples constant and equal gives (0, 1) by convention; both
    constant with different means has no finite statistic and raises.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise TooFewRuns("welch test needs two values per sample")
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    ma = float(a.mean())
    mb = float(b.mean())
    if va == 0.0 and vb == 0.0:
        if ma == mb:
            return 0.0, 1.0
        raise ZeroVariancePair(f"constant samples with means {ma:g} and {mb:g}")
    sa = va / a.size
    sb = vb / b.size
    t = (ma - mb) / float(np.sqrt(sa + sb))
    df = (sa + sb) ** 2 / (sa ** 2 / (a.size - 1) + sb ** 2 / (b.size - 1))
    p = 2.0 * float(stdtr(df, -abs(t)))
    return t, min(1.0, p)
