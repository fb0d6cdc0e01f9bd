"""Feature engine versus the independent loop oracle, plus closed forms."""

import numpy as np
import pytest

from qamm.data import CandleSeries, PlantedSignal, generate_gbm
from qamm.errors import InsufficientHistory, UnknownFeature
from qamm.features import ALL_NAMES, FEATURE_SETS, WARM_UP, build_matrix
from qamm.features.schema import GROUPS, LOOKBACKS

import oracle_features as of


def series_for_fuzz(rng):
    n = int(rng.integers(75, 141))
    if rng.random() < 0.2:
        sig = PlantedSignal(
            period=int(rng.integers(15, 35)),
            shock=float(rng.uniform(0.01, 0.03)),
            decay=float(rng.uniform(0.85, 0.98)),
            noise=float(rng.uniform(0.0, 5e-4)),
        )
        return generate_gbm(int(rng.integers(1 << 30)), n, float(rng.uniform(5, 500)), planted=sig)
    return generate_gbm(
        int(rng.integers(1 << 30)),
        n,
        float(rng.uniform(5, 500)),
        mu=float(rng.uniform(-0.5, 0.5)),
        sigma=float(rng.uniform(0.05, 1.0)),
    )


def compare_with_oracle(series):
    fm = build_matrix(series)
    want = of.oracle_matrix(series.ts, series.open, series.high, series.low,
                            series.close, series.volume)
    ok = np.isclose(fm.values, want, rtol=1e-10, atol=1e-12)
    ok |= np.isnan(fm.values) & np.isnan(want)
    return fm, want, ok


def run_feature_fuzz(n_series, seed):
    """Shared driver: returns worst-case mismatch count across series."""
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n_series):
        series = series_for_fuzz(rng)
        _, _, ok = compare_with_oracle(series)
        if not ok.all():
            bad += 1
    return bad


def test_schema_totals():
    assert len(ALL_NAMES) == 122
    assert of.ORACLE_NAMES == ALL_NAMES
    assert WARM_UP == 70
    sizes = {g: len(v) for g, v in GROUPS.items()}
    assert sum(sizes.values()) == 122
    assert sizes["lagged"] == 25 and sizes["time"] == 24


def test_feature_sets():
    assert len(FEATURE_SETS["full"]) == 122
    assert len(FEATURE_SETS["hybrid12"]) == 12
    assert len(FEATURE_SETS["quantum6"]) == 6
    assert len(FEATURE_SETS["quantum8"]) == 8
    assert set(FEATURE_SETS["quantum6"]) < set(FEATURE_SETS["quantum8"])
    for name in FEATURE_SETS["hybrid12"]:
        assert name in ALL_NAMES


def test_matches_oracle_smoke():
    rng = np.random.default_rng(123)
    for _ in range(25):
        series = series_for_fuzz(rng)
        fm, want, ok = compare_with_oracle(series)
        if not ok.all():
            rows, cols = np.nonzero(~ok)
            raise AssertionError(
                f"mismatch at row {rows[0]} col {fm.names[cols[0]]}: "
                f"{fm.values[rows[0], cols[0]]} vs {want[rows[0], cols[0]]}"
            )


def test_nan_prefix_matches_lookbacks():
    series = generate_gbm(seed=5, n=160, s0=80.0, mu=0.1, sigma=0.4)
    fm = build_matrix(series)
    for j, name in enumerate(fm.names):
        col = fm.values[:, j]
        lb = LOOKBACKS[name]
        assert np.isnan(col[:lb]).all(), name
        assert np.isfinite(col[lb:]).all(), name


def test_warmup_and_usable_rows():
    series = generate_gbm(seed=1, n=252, s0=100.0, mu=0.2, sigma=0.5)
    fm = build_matrix(series)
    assert fm.warm_up == 70
    assert fm.usable_values().shape == (182, 122)


def test_insufficient_history():
    series = generate_gbm(seed=1, n=70, s0=100.0)
    with pytest.raises(InsufficientHistory):
        build_matrix(series)
    build_matrix(series, names=["returns", "rsi"])  # small warm-up is fine


def test_unknown_feature():
    series = generate_gbm(seed=1, n=100, s0=100.0)
    with pytest.raises(UnknownFeature):
        build_matrix(series, names=["returns", "bogus"])


def constant_series(n=120, price=50.0, volume=500.0):
    ts = 1704067200 + 86400 * np.arange(n, dtype=np.int64)
    flat = np.full(n, price)
    return CandleSeries(ts, flat.copy(), flat.copy(), flat.copy(), flat.copy(),
                        np.full(n, volume))


def test_constant_series_conventions():
    fm = build_matrix(constant_series())
    get = lambda name: fm.column(name)[WARM_UP:]
    assert np.all(get("rsi") == 50.0)
    assert np.all(get("bb_position") == 0.5)
    assert np.all(get("bb_width") == 0.0)
    assert np.all(get("vol_20") == 0.0)
    assert np.all(get("vol_regime") == 0.0)
    assert np.all(get("price_position") == 0.5)
    assert np.all(get("stoch_k") == 50.0)
    assert np.all(get("williams_r") == -50.0)
    assert np.all(get("vr_20") == 1.0)
    assert np.all(get("volume_signal") == 0.0)
    assert np.all(get("vol_ratio_5_20") == 1.0)
    assert np.all(get("ofi") == 0.0)
    assert np.all(get("returns") == 0.0)
    assert np.all(get("sma_20") == 50.0)
    assert np.all(get("ema_50") == 50.0)


def test_ewma_recursion_value():
    # one step of the ewma variance recursion: 0.94 * 4e-4 + 0.06 * 9e-4
    assert 0.94 * 0.0004 + 0.06 * 0.0009 == pytest.approx(0.00043, abs=1e-18)
    series = generate_gbm(seed=2, n=100, s0=100.0, mu=0.0, sigma=0.3)
    fm = build_matrix(series, names=["vol_20", "vol_ewma", "returns"])
    vol20 = fm.column("vol_20")
    ewma = fm.column("vol_ewma")
    r = fm.column("returns")
    assert ewma[20] == pytest.approx(vol20[20], rel=1e-12)
    want = 0.94 * ewma[20] ** 2 + 0.06 * r[21] ** 2
    assert ewma[21] ** 2 == pytest.approx(want, rel=1e-12)


def test_rsi_all_gains_is_100():
    n = 40
    ts = 1704067200 + 86400 * np.arange(n, dtype=np.int64)
    c = 100.0 * 1.01 ** np.arange(n)
    o = np.concatenate(([100.0], c[:-1]))
    h = np.maximum(o, c) * 1.001
    low = np.minimum(o, c) * 0.999
    series = CandleSeries(ts, o, h, low, c, np.full(n, 10.0))
    fm = build_matrix(series, names=["rsi"])
    assert np.all(fm.column("rsi")[14:] == 100.0)


def test_time_features_known_date():
    # 2024-01-01 was a Monday.
    series = generate_gbm(seed=1, n=80, s0=10.0)
    fm = build_matrix(series, names=["day_of_week", "month", "day_of_month",
                                     "quarter", "is_weekend", "hour", "month_01"])
    assert fm.column("day_of_week")[0] == 0.0
    assert fm.column("month")[0] == 1.0
    assert fm.column("day_of_month")[0] == 1.0
    assert fm.column("quarter")[0] == 1.0
    assert fm.column("hour")[0] == 0.0
    assert fm.column("month_01")[0] == 1.0
    # day 5 of the series is saturday jan 6
    assert fm.column("is_weekend")[5] == 1.0
    assert fm.column("day_of_week")[5] == 5.0


def test_determinism():
    series = generate_gbm(seed=9, n=140, s0=30.0, mu=0.1, sigma=0.6)
    a = build_matrix(series).values
    b = build_matrix(series).values
    assert np.array_equal(a, b, equal_nan=True)
