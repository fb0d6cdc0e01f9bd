"""OHLCV ingest, validation, and synthetic series generation.

Bars are daily candles with integer epoch-second timestamps.  A series
is stored as parallel numpy arrays rather than a list of objects so the
feature engine can work on contiguous columns.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvariantViolation,
    IrregularSpacing,
    MalformedRow,
    NonMonotonicTime,
)

CSV_HEADER = ["timestamp", "open", "high", "low", "close", "volume"]

# Default origin for synthetic series: 2024-01-01 00:00:00 UTC, daily bars.
DEFAULT_START_TS = 1704067200
DAY_SECONDS = 86400


@dataclass(frozen=True)
class Candle:
    """One OHLCV bar. Prices strictly positive, volume non-negative."""

    ts: int
    open: float
    high: float
    low: float
    close: float
    volume: float

    def validate(self, index: int = -1) -> None:
        vals = (self.open, self.high, self.low, self.close, self.volume)
        if not all(math.isfinite(v) for v in vals):
            raise InvariantViolation(index, "non-finite field")
        if min(self.open, self.high, self.low, self.close) <= 0.0:
            raise InvariantViolation(index, "non-positive price")
        if self.volume < 0.0:
            raise InvariantViolation(index, "negative volume")
        lo_oc = min(self.open, self.close)
        hi_oc = max(self.open, self.close)
        if self.low > lo_oc or hi_oc > self.high:
            raise InvariantViolation(index, "low/high do not bracket open/close")


@dataclass
class CandleSeries:
    """Columnar OHLCV series with strictly increasing, uniformly spaced bars."""

    ts: np.ndarray
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray

    def __post_init__(self) -> None:
        self.ts = np.asarray(self.ts, dtype=np.int64)
        for name in ("open", "high", "low", "close", "volume"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))

    def __len__(self) -> int:
        return int(self.ts.shape[0])

    def candle(self, i: int) -> Candle:
        return Candle(
            int(self.ts[i]),
            float(self.open[i]),
            float(self.high[i]),
            float(self.low[i]),
            float(self.close[i]),
            float(self.volume[i]),
        )

    def slice(self, start: int, stop: int) -> "CandleSeries":
        return CandleSeries(
            self.ts[start:stop].copy(),
            self.open[start:stop].copy(),
            self.high[start:stop].copy(),
            self.low[start:stop].copy(),
            self.close[start:stop].copy(),
            self.volume[start:stop].copy(),
        )

    def validate(self) -> None:
        """Check every candle invariant plus time ordering and spacing."""
        n = len(self)
        for i in range(n):
            self.candle(i).validate(i)
        if n >= 2:
            deltas = np.diff(self.ts)
            if np.any(deltas <= 0):
                raise NonMonotonicTime("timestamps must strictly increase")
            if np.any(deltas != deltas[0]):
                raise IrregularSpacing("bar spacing is not uniform")


def _parse_row(index: int, row: list[str]) -> Candle:
    if len(row) != 6:
        raise MalformedRow(index, f"expected 6 fields, got {len(row)}")
    try:
        ts = int(row[0])
    except ValueError:
        raise MalformedRow(index, f"bad timestamp {row[0]!r}") from None
    try:
        o, h, l, c, v = (float(x) for x in row[1:])
    except ValueError:
        raise MalformedRow(index, "non-numeric price or volume field") from None
    return Candle(ts, o, h, l, c, v)


def load_csv(path: str, fill: str = "strict") -> CandleSeries:
    """Read an OHLCV CSV and validate it.

    fill="strict" rejects any gap in the daily grid with IrregularSpacing.
    fill="ffill" inserts flat candles (all prices at the previous close,
    zero volume) at the missing steps instead.
    """
    if fill not in ("strict", "ffill"):
        raise ValueError(f"unknown fill policy {fill!r}")
    candles: list[Candle] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(0, "empty file") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise MalformedRow(0, f"bad header {header!r}")
        for index, row in enumerate(reader, start=1):
            if not row:
                continue
            candle = _parse_row(index, row)
            candle.validate(index)
            candles.append(candle)
    if not candles:
        raise MalformedRow(0, "no data rows")

    for prev, cur in zip(candles, candles[1:]):
        if cur.ts <= prev.ts:
            raise NonMonotonicTime(f"timestamp {cur.ts} follows {prev.ts}")

    if len(candles) >= 2:
        spacing = candles[1].ts - candles[0].ts
        filled: list[Candle] = [candles[0]]
        for cur in candles[1:]:
            delta = cur.ts - filled[-1].ts
            if delta == spacing:
                filled.append(cur)
                continue
            if delta % spacing != 0 or delta < spacing:
                raise IrregularSpacing(
                    f"gap of {delta}s does not fit the {spacing}s grid"
                )
            if fill == "strict":
                raise IrregularSpacing(
                    f"missing {delta // spacing - 1} bar(s) before ts {cur.ts}"
                )
            while cur.ts - filled[-1].ts > spacing:
                prev = filled[-1]
                filled.append(
                    Candle(prev.ts + spacing, prev.close, prev.close, prev.close, prev.close, 0.0)
                )
            filled.append(cur)
        candles = filled

    series = CandleSeries(
        np.array([c.ts for c in candles], dtype=np.int64),
        np.array([c.open for c in candles]),
        np.array([c.high for c in candles]),
        np.array([c.low for c in candles]),
        np.array([c.close for c in candles]),
        np.array([c.volume for c in candles]),
    )
    series.validate()
    return series


def write_csv(series: CandleSeries, path: str) -> None:
    """Write a series back out. Floats use repr, so a load/write cycle
    preserves every value bit for bit."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i in range(len(series)):
            writer.writerow(
                [
                    int(series.ts[i]),
                    repr(float(series.open[i])),
                    repr(float(series.high[i])),
                    repr(float(series.low[i])),
                    repr(float(series.close[i])),
                    repr(float(series.volume[i])),
                ]
            )


@dataclass(frozen=True)
class PlantedSignal:
    """Mean-reversion episodes injected into a synthetic series.

    Every `period` bars the return is shocked to +-`shock` (sign
    alternating between episodes); between shocks returns follow
    r_t = -decay * r_{t-1} + eps with eps uniform on [-noise, noise].
    The magnitude |r| therefore decays geometrically through any fixed
    band, which makes band-exit labels predictable from the current bar.
    """

    period: int = 25
    shock: float = 0.02
    decay: float = 0.95
    noise: float = 3e-4


def generate_gbm(
    seed: int,
    n: int,
    s0: float,
    mu: float = 0.0,
    sigma: float = 0.2,
    start_ts: int = DEFAULT_START_TS,
    spacing: int = DAY_SECONDS,
    planted: PlantedSignal | None = None,
) -> CandleSeries:
    """Generate a daily OHLCV series.

    Without a planted signal, closes follow geometric Brownian motion at
    annualized drift mu and volatility sigma with dt = 1/252.  With one,
    closes follow the PlantedSignal return process instead and mu/sigma
    are ignored.  Highs and lows wrap the close-to-close move with a
    seeded non-negative wick, opens sit at the previous close, volumes
    are log-normal.  Identical inputs give identical output bytes.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if s0 <= 0:
        raise ValueError("s0 must be positive")
    rng = np.random.default_rng(seed)
    dt = 1.0 / 252.0

    closes = np.empty(n)
    closes[0] = s0
    if planted is None:
        z = rng.standard_normal(n - 1) if n > 1 else np.empty(0)
        log_steps = (mu - 0.5 * sigma * sigma) * dt + sigma * math.sqrt(dt) * z
        closes[1:] = s0 * np.exp(np.cumsum(log_steps))
        wick_scale = 0.3 * sigma * math.sqrt(dt)
    else:
        eps = rng.uniform(-planted.noise, planted.noise, n)
        r = 0.0
        sign = 1.0
        for t in range(1, n):
            if (t - 1) % planted.period == 0:
                r = sign * planted.shock
                sign = -sign
            else:
                r = -planted.decay * r + eps[t]
            closes[t] = closes[t - 1] * (1.0 + r)
        wick_scale = 0.1 * planted.shock

    prev = np.concatenate(([s0], closes[:-1]))
    # Cap the wick factor so an extreme draw cannot push the low below zero.
    wicks = np.minimum(np.abs(rng.standard_normal((2, n))) * wick_scale, 0.5)
    high = np.maximum(prev, closes) * (1.0 + wicks[0])
    low = np.minimum(prev, closes) * (1.0 - wicks[1])
    opens = prev
    volume = rng.lognormal(mean=13.8, sigma=0.5, size=n)

    series = CandleSeries(
        start_ts + spacing * np.arange(n, dtype=np.int64),
        opens,
        high,
        low,
        closes,
        volume,
    )
    series.validate()
    return series
