"""Vectorized computation of every schema column.

All rolling statistics use trailing windows ending at the current bar.
Sample standard deviations use ddof=1 throughout.  Columns are NaN
before their lookback; degenerate denominators resolve to the neutral
conventions documented inline rather than propagating infinities.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter

from ..data import CandleSeries

EWMA_LAMBDA = 0.94
VOL_REGIME_WINDOW = 50
VOL_REGIME_Q = 0.8
VOLUME_SIGNAL_THRESHOLD = 1.5


def _first_finite(x: np.ndarray) -> int:
    idx = np.nonzero(np.isfinite(x))[0]
    return int(idx[0]) if idx.size else x.shape[0]


def _rolling(x: np.ndarray, w: int, fn) -> np.ndarray:
    """Apply fn over trailing windows of w values, NaN before warm-up.
    The NaN prefix of x is skipped, so validity indexes add up."""
    n = x.shape[0]
    out = np.full(n, np.nan)
    s = _first_finite(x)
    if n - s >= w:
        out[s + w - 1:] = fn(sliding_window_view(x[s:], w))
    return out


def rolling_mean(x, w):
    return _rolling(x, w, lambda v: v.mean(axis=1))


def rolling_std(x, w):
    return _rolling(x, w, lambda v: v.std(axis=1, ddof=1))


def rolling_max(x, w):
    return _rolling(x, w, lambda v: v.max(axis=1))


def rolling_min(x, w):
    return _rolling(x, w, lambda v: v.min(axis=1))


def ema(x: np.ndarray, w: int) -> np.ndarray:
    """EMA seeded with the SMA of the first w values at index w-1."""
    n = x.shape[0]
    out = np.full(n, np.nan)
    s = _first_finite(x)
    if n - s < w:
        return out
    alpha = 2.0 / (w + 1.0)
    seed = x[s:s + w].mean()
    out[s + w - 1] = seed
    rest = x[s + w:]
    if rest.size:
        y, _ = lfilter([alpha], [1.0, -(1.0 - alpha)], rest, zi=[(1.0 - alpha) * seed])
        out[s + w:] = y
    return out


def _safe_div(num: np.ndarray, den: np.ndarray, fallback: float) -> np.ndarray:
    """num/den with a fixed value where den == 0; NaN stays NaN."""
    out = np.full(num.shape, np.nan)
    nan_mask = np.isnan(num) | np.isnan(den)
    zero = (den == 0.0) & ~nan_mask
    ok = ~zero & ~nan_mask
    out[ok] = num[ok] / den[ok]
    out[zero] = fallback
    return out


def compute_all(series: CandleSeries) -> dict[str, np.ndarray]:
    o = series.open
    h = series.high
    l = series.low
    c = series.close
    v = series.volume
    ts = series.ts
    n = len(series)
    nan = np.full(n, np.nan)
    out: dict[str, np.ndarray] = {}

    # ----- basic -------------------------------------------------------
    r = nan.copy()
    r[1:] = c[1:] / c[:-1] - 1.0
    logr = nan.copy()
    logr[1:] = np.log(c[1:] / c[:-1])
    out["returns"] = r
    out["log_returns"] = logr

    sma = {w: rolling_mean(c, w) for w in (5, 10, 20, 50)}
    out["price_ma_ratio"] = c / sma[20]
    out["high_low_ratio"] = h / l
    # flat bar: price sits mid-range by convention
    out["price_position"] = _safe_div(c - l, h - l, 0.5)
    mom5 = nan.copy()
    mom5[5:] = c[5:] / c[:-5] - 1.0
    out["price_momentum"] = mom5
    out["price_sma_20_ratio"] = c / sma[20]
    mom10 = nan.copy()
    mom10[10:] = c[10:] / c[:-10] - 1.0
    out["price_momentum_10"] = mom10

    # ----- moving averages --------------------------------------------
    emas = {w: ema(c, w) for w in (5, 10, 20, 50)}
    for w in (5, 10, 20, 50):
        out[f"sma_{w}"] = sma[w]
        out[f"ema_{w}"] = emas[w]
        out[f"sma_ratio_{w}"] = c / sma[w]
        out[f"ema_ratio_{w}"] = c / emas[w]

    # ----- technical ---------------------------------------------------
    gains = np.where(np.isnan(r), np.nan, np.maximum(r, 0.0))
    losses = np.where(np.isnan(r), np.nan, np.maximum(-r, 0.0))
    avg_gain = rolling_mean(gains, 14)
    avg_loss = rolling_mean(losses, 14)
    rsi = np.full(n, np.nan)
    valid = ~np.isnan(avg_gain)
    both_zero = valid & (avg_gain == 0.0) & (avg_loss == 0.0)
    no_loss = valid & (avg_loss == 0.0) & (avg_gain > 0.0)
    normal = valid & (avg_loss > 0.0)
    rsi[normal] = 100.0 - 100.0 / (1.0 + avg_gain[normal] / avg_loss[normal])
    rsi[no_loss] = 100.0
    rsi[both_zero] = 50.0
    out["rsi"] = rsi

    ema12 = ema(c, 12)
    ema26 = ema(c, 26)
    macd = ema12 - ema26
    out["macd"] = macd
    macd_signal = ema(macd, 9)
    out["macd_signal"] = macd_signal
    out["macd_histogram"] = macd - macd_signal

    bb_mid = sma[20]
    bb_std = rolling_std(c, 20)
    bb_up = bb_mid + 2.0 * bb_std
    bb_lo = bb_mid - 2.0 * bb_std
    out["bb_middle"] = bb_mid
    out["bb_upper"] = bb_up
    out["bb_lower"] = bb_lo
    out["bb_width"] = _safe_div(bb_up - bb_lo, bb_mid, 0.0)
    # zero-width band: mid position by convention
    out["bb_position"] = _safe_div(c - bb_lo, bb_up - bb_lo, 0.5)

    tr = nan.copy()
    tr[1:] = np.maximum.reduce(
        [h[1:] - l[1:], np.abs(h[1:] - c[:-1]), np.abs(l[1:] - c[:-1])]
    )
    atr = rolling_mean(tr, 14)
    out["tr"] = tr
    out["atr"] = atr
    out["atr_ratio"] = atr / c

    hh14 = rolling_max(h, 14)
    ll14 = rolling_min(l, 14)
    stoch_k = _safe_div(100.0 * (c - ll14), hh14 - ll14, 50.0)
    out["stoch_k"] = stoch_k
    out["stoch_d"] = rolling_mean(stoch_k, 3)
    out["williams_r"] = _safe_div(-100.0 * (hh14 - c), hh14 - ll14, -50.0)

    # ----- volatility --------------------------------------------------
    vols = {w: rolling_std(r, w) for w in (5, 10, 20, 50)}
    for w in (5, 10, 20, 50):
        out[f"vol_{w}"] = vols[w]
    vol20 = vols[20]

    var_ewma = nan.copy()
    s = _first_finite(vol20)
    if s < n:
        var_ewma[s] = vol20[s] ** 2
        rest = r[s + 1:] ** 2
        if rest.size:
            y, _ = lfilter(
                [1.0 - EWMA_LAMBDA], [1.0, -EWMA_LAMBDA], rest,
                zi=[EWMA_LAMBDA * var_ewma[s]],
            )
            var_ewma[s + 1:] = y
    out["vol_ewma"] = np.sqrt(var_ewma)

    out["vov"] = rolling_std(vol20, 10)

    # 80th percentile of the trailing 50 sigma_20 values, excluding the
    # current bar; regime = 1 when today's sigma_20 exceeds it.
    regime = nan.copy()
    sv = _first_finite(vol20)
    clean = vol20[sv:]
    if clean.shape[0] > VOL_REGIME_WINDOW:
        qs = np.quantile(
            sliding_window_view(clean, VOL_REGIME_WINDOW), VOL_REGIME_Q, axis=1
        )
        start = sv + VOL_REGIME_WINDOW
        usable = n - start
        regime[start:] = (vol20[start:] > qs[:usable]).astype(np.float64)
    out["vol_regime"] = regime

    out["vol_ratio_5_20"] = _safe_div(vols[5], vol20, 1.0)
    out["vol_ratio_10_20"] = _safe_div(vols[10], vol20, 1.0)
    out["vol_ratio_20_50"] = _safe_div(vol20, vols[50], 1.0)
    vch = nan.copy()
    vch[1:] = vol20[1:] - vol20[:-1]
    out["vol_change_20"] = vch

    log_hl_sq = np.log(h / l) ** 2
    out["parkinson_20"] = np.sqrt(
        rolling_mean(log_hl_sq, 20) / (4.0 * np.log(2.0))
    )

    # ----- volume ------------------------------------------------------
    vr = {}
    for w in (5, 10, 20):
        vr[w] = _safe_div(v, rolling_mean(v, w), 1.0)
        out[f"vr_{w}"] = vr[w]
    out["vpt"] = v * r
    delta = np.sign(np.diff(c))
    obv = np.concatenate(([0.0], np.cumsum(delta * v[1:])))
    out["obv"] = obv
    sig = nan.copy()
    ok = ~np.isnan(vr[20])
    sig[ok] = (vr[20][ok] > VOLUME_SIGNAL_THRESHOLD).astype(np.float64)
    out["volume_signal"] = sig
    vchg = nan.copy()
    vchg[1:] = _safe_div(v[1:] - v[:-1], v[:-1], 0.0)
    out["volume_change"] = vchg
    out["log_volume"] = np.log1p(v)

    # ----- time --------------------------------------------------------
    days = ts // 86400
    hour = ((ts % 86400) // 3600).astype(np.float64)
    dow = ((days + 3) % 7).astype(np.float64)  # epoch day 0 was a Thursday
    dt = ts.astype("datetime64[s]")
    months64 = dt.astype("datetime64[M]")
    years64 = dt.astype("datetime64[Y]")
    month = (months64 - years64).astype(np.int64).astype(np.float64) + 1.0
    dom = (dt.astype("datetime64[D]") - months64).astype(np.int64).astype(np.float64) + 1.0
    out["hour_sin"] = np.sin(2.0 * np.pi * hour / 24.0)
    out["hour_cos"] = np.cos(2.0 * np.pi * hour / 24.0)
    out["dow_sin"] = np.sin(2.0 * np.pi * dow / 7.0)
    out["dow_cos"] = np.cos(2.0 * np.pi * dow / 7.0)
    out["month_sin"] = np.sin(2.0 * np.pi * (month - 1.0) / 12.0)
    out["month_cos"] = np.cos(2.0 * np.pi * (month - 1.0) / 12.0)
    out["hour"] = hour
    out["day_of_week"] = dow
    out["day_of_month"] = dom
    out["month"] = month
    out["quarter"] = np.floor((month - 1.0) / 3.0) + 1.0
    out["is_weekend"] = (dow >= 5.0).astype(np.float64)
    for m in range(1, 13):
        out[f"month_{m:02d}"] = (month == float(m)).astype(np.float64)

    # ----- microstructure ---------------------------------------------
    spread = (h - l) / c
    out["spread"] = spread
    impact = _safe_div(np.abs(r), np.log1p(v), 0.0)
    out["impact"] = impact
    ofi = _safe_div(c - o, h - l, 0.0)
    out["ofi"] = ofi
    out["spread_ma_20"] = rolling_mean(spread, 20)
    out["impact_ma_20"] = rolling_mean(impact, 20)
    out["ofi_ma_20"] = rolling_mean(ofi, 20)
    out["spread_vol_20"] = rolling_std(spread, 20)
    gap = nan.copy()
    gap[1:] = o[1:] / c[:-1] - 1.0
    out["gap_open"] = gap

    # ----- lagged ------------------------------------------------------
    for base in ("returns", "log_returns", "vr_20", "vol_20", "rsi"):
        src = out[base]
        for lag in (1, 2, 3, 5, 10):
            col = nan.copy()
            col[lag:] = src[:-lag]
            out[f"{base}_lag_{lag}"] = col

    # ----- interaction -------------------------------------------------
    out["vol_volume_interaction"] = vol20 * vr[20]
    out["momentum_rsi_interaction"] = r * (rsi - 50.0) / 50.0
    out["returns_volume_interaction"] = r * vr[20]
    out["vol_rsi_interaction"] = vol20 * (rsi - 50.0) / 50.0
    out["spread_volume_interaction"] = spread * vr[20]
    out["atr_vol_interaction"] = out["atr_ratio"] * vol20
    return out
