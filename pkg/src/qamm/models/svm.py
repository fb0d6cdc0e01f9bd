"""Kernel SVM trained by sequential minimal optimization.

The solver is deterministic: the first index comes from an in-order
KKT scan and the partner maximizes |E_i - E_j|, so identical inputs
produce identical duals.  Kernels come precomputed; the model wrapper
builds either the state-overlap kernel on angle-scaled features or an
RBF kernel on raw features.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonPsdKernel, NotFitted
from ..qsim import AngleScaler, fidelity_kernel, rbf_kernel, scale_gamma
from .base import check_binary_labels, sigmoid


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float = 1.0,
    tol: float = 1e-3,
    max_passes: int = 200,
) -> tuple[np.ndarray, float, int]:
    """Solve the soft-margin dual for labels y in {-1, +1}.

    Returns (alpha, b, sweeps).  Stops when a full sweep changes no
    pair, or at max_passes sweeps.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    alpha = np.zeros(n)
    b = 0.0
    f = np.zeros(n)  # sum_j alpha_j y_j K_ij, without b
    sweeps = 0
    while sweeps < max_passes:
        sweeps += 1
        changed = 0
        for i in range(n):
            e_i = f[i] + b - y[i]
            r_i = e_i * y[i]
            if not ((r_i < -tol and alpha[i] < C) or (r_i > tol and alpha[i] > 0.0)):
                continue
            errs = f + b - y
            # best-first partner order; fall through when a pair yields
            # no step so a single bad partner cannot stall the sweep
            order = np.argsort(-np.abs(e_i - errs), kind="stable")
            for j in order:
                j = int(j)
                if j == i:
                    continue
                e_j = errs[j]
                if y[i] != y[j]:
                    lo = max(0.0, alpha[j] - alpha[i])
                    hi = min(C, C + alpha[j] - alpha[i])
                else:
                    lo = max(0.0, alpha[i] + alpha[j] - C)
                    hi = min(C, alpha[i] + alpha[j])
                if lo >= hi:
                    continue
                eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                if eta >= 0.0:
                    continue
                a_j = alpha[j] - y[j] * (e_i - e_j) / eta
                a_j = min(hi, max(lo, a_j))
                d_j = a_j - alpha[j]
                if abs(d_j) < 1e-12:
                    continue
                d_i = -y[i] * y[j] * d_j
                a_i = alpha[i] + d_i
                b1 = b - e_i - y[i] * d_i * K[i, i] - y[j] * d_j * K[i, j]
                b2 = b - e_j - y[i] * d_i * K[i, j] - y[j] * d_j * K[j, j]
                if 0.0 < a_i < C:
                    b = b1
                elif 0.0 < a_j < C:
                    b = b2
                else:
                    b = 0.5 * (b1 + b2)
                f += d_i * y[i] * K[i] + d_j * y[j] * K[j]
                alpha[i] = a_i
                alpha[j] = a_j
                changed += 1
                break
        if changed == 0:
            break
    return alpha, b, sweeps


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """W(alpha) = sum alpha - 1/2 alpha^T (yy^T * K) alpha."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


class QsvmModel:
    """Binary kernel classifier; default kernel is the state overlap of
    the product RY feature map on angle-scaled features."""

    def __init__(self, kernel: str = "fidelity", C: float = 1.0,
                 gamma: float | str = "scale", tol: float = 1e-3):
        if kernel not in ("fidelity", "rbf"):
            raise ValueError(f"unknown kernel {kernel!r}")
        self.kernel = kernel
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.scaler: AngleScaler | None = None
        self.gamma_: float | None = None
        self.x_train: np.ndarray | None = None
        self.alpha_y: np.ndarray | None = None
        self.b: float = 0.0
        self.sweeps: int = 0

    def _train_gram(self, X: np.ndarray) -> np.ndarray:
        if self.kernel == "fidelity":
            self.scaler = AngleScaler().fit(X)
            self.x_train = self.scaler.transform(X)
            return fidelity_kernel(self.x_train)
        self.gamma_ = scale_gamma(X) if self.gamma == "scale" else float(self.gamma)
        self.x_train = np.asarray(X, dtype=np.float64)
        return rbf_kernel(self.x_train, gamma=self.gamma_)

    def _cross_gram(self, X: np.ndarray) -> np.ndarray:
        if self.kernel == "fidelity":
            return fidelity_kernel(self.scaler.transform(X), self.x_train)
        return rbf_kernel(np.asarray(X, dtype=np.float64), self.x_train, gamma=self.gamma_)

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "QsvmModel":
        y01 = check_binary_labels(y)
        ypm = 2.0 * y01.astype(np.float64) - 1.0
        K = self._train_gram(np.asarray(X, dtype=np.float64))
        lam_min = float(np.linalg.eigvalsh(K).min())
        if lam_min < -1e-8:
            raise NonPsdKernel(f"min Gram eigenvalue {lam_min:.3e}")
        if lam_min < 0.0:
            # round-off negatives only; nudge the diagonal back to PSD
            K = K + (-lam_min) * np.eye(K.shape[0])
        alpha, self.b, self.sweeps = smo_solve(K, ypm, C=self.C, tol=self.tol)
        self.alpha_y = alpha * ypm
        self._last_gram = K
        self._last_alpha = alpha
        self._last_y = ypm
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        if self.alpha_y is None:
            raise NotFitted("QsvmModel.predict before fit")
        return self._cross_gram(X) @ self.alpha_y + self.b

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int8)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        # monotone squash of the margin; ranking metrics only
        return sigmoid(self.decision_function(X))

    @property
    def n_support(self) -> int:
        return int((np.abs(self.alpha_y) > 1e-10).sum())

    def to_dict(self) -> dict:
        return {
            "kind": "qsvm",
            "kernel": self.kernel,
            "C": self.C,
            "b": self.b,
            "alpha_y": self.alpha_y.tolist(),
            "n_support": self.n_support,
        }
