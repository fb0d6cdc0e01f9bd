"""Binary rebalance labels and the chronological split.

All three tasks are band-exit rules on a single feature column.  Labels
are aligned to the post-warm-up feature rows; the warm-up is always the
full-schema value so every model family shares one row indexing and one
split regardless of which feature subset it consumes.

With predict_ahead = k > 0 the label at row t answers whether the rule
fires k bars later; the last k rows are dropped.  The split is 70/15/15
by floor: train ends at floor(0.7 U), validation at floor(0.85 U).
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass

import numpy as np

from .data import CandleSeries
from .errors import DegenerateLabels, InsufficientHistory, UnknownLabelRule
from .features import WARM_UP
from .features.indicators import compute_all

log = logging.getLogger(__name__)

REBALANCE_BAND = 0.02
BB_BAND = 0.3
RETURN_BAND = 0.01
MIN_CLASS_TRAIN = 5

TASKS = ("amm_rebalance", "concentrated_liquidity", "quantum_enhanced")


def _rule_values(task: str, cols: dict[str, np.ndarray]) -> np.ndarray:
    if task == "amm_rebalance":
        return np.abs(cols["price_ma_ratio"] - 1.0) > REBALANCE_BAND
    if task == "concentrated_liquidity":
        return np.abs(cols["bb_position"] - 0.5) > BB_BAND
    if task == "quantum_enhanced":
        return np.abs(cols["returns"]) > RETURN_BAND
    raise UnknownLabelRule(task)


def split_sizes(n_rows: int) -> tuple[int, int, int]:
    # Integer arithmetic: floor(0.7 * 90) in floats is 62, not 63.
    t = (7 * n_rows) // 10
    v = (85 * n_rows) // 100 - t
    return t, v, n_rows - t - v


@dataclass
class LabelSet:
    task: str
    predict_ahead: int
    y: np.ndarray
    ts: np.ndarray
    n_train: int
    n_val: int
    n_test: int

    def __len__(self) -> int:
        return int(self.y.shape[0])

    @property
    def train(self) -> slice:
        return slice(0, self.n_train)

    @property
    def val(self) -> slice:
        return slice(self.n_train, self.n_train + self.n_val)

    @property
    def test(self) -> slice:
        return slice(self.n_train + self.n_val, len(self))


def make_labels(series: CandleSeries, task: str, predict_ahead: int = 0) -> LabelSet:
    if task not in TASKS:
        raise UnknownLabelRule(task)
    if predict_ahead < 0:
        raise ValueError("predict_ahead must be >= 0")
    n = len(series)
    usable = n - WARM_UP - predict_ahead
    if usable < 1:
        raise InsufficientHistory(
            f"{n} bars leave no labeled rows at warm-up {WARM_UP}, "
            f"predict_ahead {predict_ahead}"
        )
    cols = compute_all(series)
    raw = _rule_values(task, cols)
    y = raw[WARM_UP + predict_ahead:].astype(np.int8)
    ts = series.ts[WARM_UP: WARM_UP + usable].copy()

    n_train, n_val, n_test = split_sizes(usable)
    train_y = y[:n_train]
    pos = int(train_y.sum())
    neg = n_train - pos
    if min(pos, neg) < MIN_CLASS_TRAIN:
        raise DegenerateLabels(
            f"task {task}: train split has {pos} positive / {neg} negative rows"
        )
    return LabelSet(
        task=task,
        predict_ahead=predict_ahead,
        y=y,
        ts=ts,
        n_train=n_train,
        n_val=n_val,
        n_test=n_test,
    )


def write_labels_csv(labels: LabelSet, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "label"])
        for t, v in zip(labels.ts, labels.y):
            writer.writerow([int(t), int(v)])


def write_split_json(labels: LabelSet, path: str) -> None:
    doc = {
        "task": labels.task,
        "predict_ahead": labels.predict_ahead,
        "rows": len(labels),
        "train": [0, labels.n_train],
        "val": [labels.n_train, labels.n_train + labels.n_val],
        "test": [labels.n_train + labels.n_val, len(labels)],
        "positives": int(labels.y.sum()),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
