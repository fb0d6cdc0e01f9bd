"""State-overlap and RBF kernels for the kernel classifier."""

from __future__ import annotations

import numpy as np

from . import circuits
from .circuits import ry_product_template


def feature_states(angles: np.ndarray) -> np.ndarray:
    """Product feature map: |phi(x)> = prod_i RY(x_i) |0...0>."""
    angles = np.atleast_2d(np.asarray(angles, dtype=np.float64))
    circ = ry_product_template(angles.shape[1])
    return circuits.run(circ, np.empty(0), inputs=angles)


def fidelity_kernel(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Gram matrix k(x, y) = |<phi(x)|phi(y)>|^2 for angle rows a, b."""
    sa = feature_states(a)
    sb = sa if b is None else feature_states(b)
    overlap = sa.conj() @ sb.T
    return (overlap.real ** 2 + overlap.imag ** 2).astype(np.float64)


def rbf_kernel(a: np.ndarray, b: np.ndarray | None = None, gamma: float = 1.0) -> np.ndarray:
    """exp(-gamma * |x - y|^2) Gram matrix."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    bb = a if b is None else np.atleast_2d(np.asarray(b, dtype=np.float64))
    sq = (
        (a * a).sum(axis=1)[:, None]
        + (bb * bb).sum(axis=1)[None, :]
        - 2.0 * (a @ bb.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def scale_gamma(X: np.ndarray) -> float:
    """The 1 / (d * Var(X)) heuristic over all matrix entries."""
    X = np.asarray(X, dtype=np.float64)
    var = float(X.var())
    if var <= 0.0:
        return 1.0
    return 1.0 / (X.shape[1] * var)
