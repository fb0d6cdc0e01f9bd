"""Feature matrix assembly and serialization."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from ..data import CandleSeries
from ..errors import InsufficientHistory
from . import indicators, schema


@dataclass
class FeatureMatrix:
    """(N, d) float64 matrix over the full series; NaN in the warm-up
    prefix, finite everywhere after it."""

    names: list[str]
    values: np.ndarray
    warm_up: int
    ts: np.ndarray

    def usable_values(self) -> np.ndarray:
        return self.values[self.warm_up:]

    def usable_ts(self) -> np.ndarray:
        return self.ts[self.warm_up:]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


def build_matrix(series: CandleSeries, names: list[str] | None = None) -> FeatureMatrix:
    """Compute the selected columns (default: all 122).

    Raises InsufficientHistory when no row survives the warm-up, and
    fails loudly if any post-warm-up value is not finite, which would
    mean a column's declared lookback is wrong.
    """
    names = list(schema.ALL_NAMES) if names is None else list(names)
    schema.check_names(names)
    cols = indicators.compute_all(series)
    values = np.column_stack([cols[n] for n in names])
    warm_up = max(schema.LOOKBACKS[n] for n in names)
    if len(series) <= warm_up:
        raise InsufficientHistory(
            f"{len(series)} bars, warm-up needs more than {warm_up}"
        )
    tail = values[warm_up:]
    if not np.isfinite(tail).all():
        bad_rows, bad_cols = np.nonzero(~np.isfinite(tail))
        raise AssertionError(
            f"non-finite value after warm-up at row {warm_up + bad_rows[0]}, "
            f"column {names[bad_cols[0]]}"
        )
    return FeatureMatrix(names=names, values=values, warm_up=warm_up, ts=series.ts.copy())


def write_features_csv(fm: FeatureMatrix, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp"] + fm.names)
        for i in range(fm.values.shape[0]):
            writer.writerow(
                [int(fm.ts[i])] + [repr(float(x)) for x in fm.values[i]]
            )


def write_schema_json(fm: FeatureMatrix, path: str) -> None:
    group_of = {n: g for g, members in schema.GROUPS.items() for n in members}
    doc = {
        "columns": [
            {"name": n, "group": group_of[n], "lookback": schema.LOOKBACKS[n]}
            for n in fm.names
        ],
        "warm_up": fm.warm_up,
        "rows": int(fm.values.shape[0]),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
