"""Classical-to-quantum input maps: angle scaling and amplitude encoding."""

from __future__ import annotations

import logging
import math

import numpy as np

from ..errors import BadAmplitudeDim, NotFitted, ZeroVector

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class AngleScaler:
    """Maps features to rotation angles in [0, 2*pi].

    Bounds come from the training matrix only; transform clips out of
    range values before scaling so test data cannot leave the interval.
    A feature with equal min and max has no usable range: it maps to the
    midpoint angle pi and is recorded in `degenerate`.
    """

    def __init__(self) -> None:
        self.lo: np.ndarray | None = None
        self.hi: np.ndarray | None = None
        self.degenerate: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "AngleScaler":
        X = np.asarray(X, dtype=np.float64)
        self.lo = X.min(axis=0)
        self.hi = X.max(axis=0)
        self.degenerate = self.hi == self.lo
        if self.degenerate.any():
            cols = np.nonzero(self.degenerate)[0].tolist()
            log.warning("angle encoding: degenerate bounds for columns %s", cols)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.lo is None:
            raise NotFitted("AngleScaler.transform before fit")
        X = np.clip(np.asarray(X, dtype=np.float64), self.lo, self.hi)
        span = np.where(self.degenerate, 1.0, self.hi - self.lo)
        angles = TWO_PI * (X - self.lo) / span
        return np.where(self.degenerate, math.pi, angles)

    def fit_transform(self, X: np.ndarray) -> np.ndarray:
        return self.fit(X).transform(X)


def amplitude_encode(X: np.ndarray, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Normalize rows of X into statevectors on n qubits.

    d-dimensional rows are zero padded up to 2**n amplitudes with
    n = ceil(log2(d)) when not given.  Returns (states, norms); states
    are complex128 of shape (B, 2**n).  Rows with zero norm are
    rejected: there is no direction to encode.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    d = X.shape[1]
    if d < 1:
        raise BadAmplitudeDim("empty feature vector")
    need = max(1, math.ceil(math.log2(d))) if d > 1 else 1
    if n is None:
        n = need
    elif d > (1 << n):
        raise BadAmplitudeDim(f"{d} amplitudes do not fit {n} qubits")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVector("amplitude encoding of a zero vector")
    states = np.zeros((X.shape[0], 1 << n), dtype=np.complex128)
    states[:, :d] = X / norms[:, None]
    return states, norms
