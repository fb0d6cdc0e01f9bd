"""The feature registry: 122 named columns in 9 groups.

Column order is frozen; downstream CSVs, model inputs, and the loop
oracle in the test suite all index against this list.  The lookback of
a column is the first bar index at which it is defined; the matrix
warm-up is the maximum lookback over the selected columns.
"""

from __future__ import annotations

from ..errors import UnknownFeature

_LAG_BASES = [("returns", 1), ("log_returns", 1), ("vr_20", 19), ("vol_20", 20), ("rsi", 14)]
_LAGS = [1, 2, 3, 5, 10]

# (name, lookback) per group, in order.
_SCHEMA: list[tuple[str, str, int]] = []


def _add(group: str, *cols: tuple[str, int]) -> None:
    for name, lb in cols:
        _SCHEMA.append((name, group, lb))


_add(
    "basic",
    ("returns", 1),
    ("log_returns", 1),
    ("price_ma_ratio", 19),
    ("high_low_ratio", 0),
    ("price_position", 0),
    ("price_momentum", 5),
    ("price_sma_20_ratio", 19),
    ("price_momentum_10", 10),
)
_add(
    "ma",
    *[(f"sma_{w}", w - 1) for w in (5, 10, 20, 50)],
    *[(f"ema_{w}", w - 1) for w in (5, 10, 20, 50)],
    *[(f"sma_ratio_{w}", w - 1) for w in (5, 10, 20, 50)],
    *[(f"ema_ratio_{w}", w - 1) for w in (5, 10, 20, 50)],
)
_add(
    "technical",
    ("rsi", 14),
    ("macd", 25),
    ("macd_signal", 33),
    ("macd_histogram", 33),
    ("bb_middle", 19),
    ("bb_upper", 19),
    ("bb_lower", 19),
    ("bb_width", 19),
    ("bb_position", 19),
    ("tr", 1),
    ("atr", 14),
    ("atr_ratio", 14),
    ("stoch_k", 13),
    ("stoch_d", 15),
    ("williams_r", 13),
)
_add(
    "volatility",
    ("vol_5", 5),
    ("vol_10", 10),
    ("vol_20", 20),
    ("vol_50", 50),
    ("vol_ewma", 20),
    ("vov", 29),
    ("vol_regime", 70),
    ("vol_ratio_5_20", 20),
    ("vol_ratio_10_20", 20),
    ("vol_ratio_20_50", 50),
    ("vol_change_20", 21),
    ("parkinson_20", 19),
)
_add(
    "volume",
    ("vr_5", 4),
    ("vr_10", 9),
    ("vr_20", 19),
    ("vpt", 1),
    ("obv", 0),
    ("volume_signal", 19),
    ("volume_change", 1),
    ("log_volume", 0),
)
_add(
    "time",
    ("hour_sin", 0),
    ("hour_cos", 0),
    ("dow_sin", 0),
    ("dow_cos", 0),
    ("month_sin", 0),
    ("month_cos", 0),
    ("hour", 0),
    ("day_of_week", 0),
    ("day_of_month", 0),
    ("month", 0),
    ("quarter", 0),
    ("is_weekend", 0),
    *[(f"month_{m:02d}", 0) for m in range(1, 13)],
)
_add(
    "microstructure",
    ("spread", 0),
    ("impact", 1),
    ("ofi", 0),
    ("spread_ma_20", 19),
    ("impact_ma_20", 20),
    ("ofi_ma_20", 19),
    ("spread_vol_20", 19),
    ("gap_open", 1),
)
_add(
    "lagged",
    *[
        (f"{base}_lag_{lag}", lb + lag)
        for base, lb in _LAG_BASES
        for lag in _LAGS
    ],
)
_add(
    "interaction",
    ("vol_volume_interaction", 20),
    ("momentum_rsi_interaction", 14),
    ("returns_volume_interaction", 19),
    ("vol_rsi_interaction", 20),
    ("spread_volume_interaction", 19),
    ("atr_vol_interaction", 20),
)

ALL_NAMES: list[str] = [name for name, _, _ in _SCHEMA]
GROUPS: dict[str, list[str]] = {}
for name, group, _ in _SCHEMA:
    GROUPS.setdefault(group, []).append(name)
LOOKBACKS: dict[str, int] = {name: lb for name, _, lb in _SCHEMA}

assert len(ALL_NAMES) == 122, len(ALL_NAMES)
assert len(set(ALL_NAMES)) == 122

WARM_UP: int = max(LOOKBACKS.values())

# Named subsets consumed by the model families.  The hybrid set is the
# 12-feature qubit map; the quantum sets are its 6 primaries, plus two
# extra angle slots in the 8-wide variant.
FEATURE_SETS: dict[str, list[str]] = {
    "full": list(ALL_NAMES),
    "hybrid12": [
        "returns",
        "price_momentum",
        "price_ma_ratio",
        "price_sma_20_ratio",
        "vol_20",
        "vol_regime",
        "rsi",
        "macd",
        "vr_20",
        "volume_signal",
        "bb_position",
        "atr_ratio",
    ],
    "quantum6": [
        "price_momentum",
        "price_ma_ratio",
        "vol_20",
        "rsi",
        "vr_20",
        "bb_position",
    ],
    "quantum8": [
        "price_momentum",
        "price_ma_ratio",
        "vol_20",
        "rsi",
        "vr_20",
        "bb_position",
        "macd",
        "atr_ratio",
    ],
}


def feature_set(name: str) -> list[str]:
    try:
        return list(FEATURE_SETS[name])
    except KeyError:
        raise UnknownFeature(f"unknown feature set {name!r}") from None


def check_names(names: list[str]) -> None:
    known = set(ALL_NAMES)
    for n in names:
        if n not in known:
            raise UnknownFeature(n)
