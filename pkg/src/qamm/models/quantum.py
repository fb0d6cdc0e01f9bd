"""Variational quantum classifiers trained with parameter-shift
gradients on the embedded simulator."""

from __future__ import annotations

import numpy as np

from ..errors import NotFitted
from ..qsim import AngleScaler, expectations, param_jacobian, vqe_template, qnn_template
from .base import check_binary_labels, log_loss, sigmoid
from .optim import Adam


class VqeModel:
    """Variational classifier: sign-free logistic readout over per-qubit
    expectations, margin = w . <Z> + b, probability sigmoid(margin).

    Circuit parameters start uniform in [-init_scale, init_scale]; the
    readout starts at zero, so the initial probability is exactly one
    half everywhere.
    """

    def __init__(self, n_qubits: int = 6, layers: int = 2, epochs: int = 200,
                 lr: float = 0.01, init_scale: float = 0.1):
        self.n_qubits = n_qubits
        self.layers = layers
        self.epochs = epochs
        self.lr = lr
        self.init_scale = init_scale
        self.circ = vqe_template(n_qubits, layers)
        self.scaler: AngleScaler | None = None
        self.theta: np.ndarray | None = None
        self.w: np.ndarray | None = None
        self.b: float = 0.0
        self.train_losses: list[float] = []

    def _margins(self, angles: np.ndarray) -> np.ndarray:
        z = expectations(self.circ, self.theta, inputs=angles)
        return z @ self.w + self.b

    def loss_grads(self, angles, y):
        """Loss and analytic gradients at the current (theta, w, b).
        The theta part contracts the parameter-shift jacobian with the
        readout weights; exposed so tests can difference it."""
        n = angles.shape[0]
        z = expectations(self.circ, self.theta, inputs=angles)
        p = sigmoid(z @ self.w + self.b)
        err = (p - y) / n
        jac = param_jacobian(self.circ, self.theta, inputs=angles)
        g_theta = np.einsum("b,bij,i->j", err, jac, self.w)
        return log_loss(p, y), g_theta, z.T @ err, err.sum()

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "VqeModel":
        y = check_binary_labels(y).astype(np.float64)
        rng = np.random.default_rng(seed)
        self.scaler = AngleScaler().fit(X)
        angles = self.scaler.transform(X)
        self.theta = rng.uniform(-self.init_scale, self.init_scale, self.circ.n_params)
        self.w = np.zeros(self.n_qubits)
        self.b = 0.0
        opt = Adam(self.circ.n_params + self.n_qubits + 1, lr=self.lr)
        self.train_losses = []
        for _ in range(self.epochs):
            loss, g_theta, g_w, g_b = self.loss_grads(angles, y)
            self.train_losses.append(loss)
            upd = opt.step(np.concatenate([g_theta, g_w, [g_b]]))
            self.theta -= upd[: self.circ.n_params]
            self.w -= upd[self.circ.n_params:-1]
            self.b -= upd[-1]
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.scaler is None:
            raise NotFitted("VqeModel.predict before fit")
        return sigmoid(self._margins(self.scaler.transform(X)))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "kind": "vqe",
            "n_qubits": self.n_qubits,
            "layers": self.layers,
            "theta": self.theta.tolist(),
            "w": self.w.tolist(),
            "b": self.b,
        }


class QnnModel:
    """Readout-qubit network: probability (1 + <Z_0>) / 2 after an
    RY/RZ feature map and entangling variational layers."""

    EPS = 1e-7

    def __init__(self, n_qubits: int = 6, layers: int = 3, epochs: int = 200,
                 lr: float = 0.01, init_scale: float = 0.1):
        self.n_qubits = n_qubits
        self.layers = layers
        self.epochs = epochs
        self.lr = lr
        self.init_scale = init_scale
        self.circ = qnn_template(n_qubits, layers)
        self.scaler: AngleScaler | None = None
        self.theta: np.ndarray | None = None
        self.train_losses: list[float] = []

    def loss_grad(self, angles, y):
        """Cross-entropy and its parameter-shift gradient at theta."""
        n = angles.shape[0]
        z0 = expectations(self.circ, self.theta, inputs=angles, qubits=[0])[:, 0]
        p = 0.5 * (1.0 + z0)
        pc = np.clip(p, self.EPS, 1.0 - self.EPS)
        # dL/dz = (p - y) / (2 p (1 - p)), mean over the batch
        dz = (pc - y) / (2.0 * pc * (1.0 - pc)) / n
        jac = param_jacobian(self.circ, self.theta, inputs=angles, qubits=[0])[:, 0, :]
        return log_loss(p, y), jac.T @ dz

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "QnnModel":
        y = check_binary_labels(y).astype(np.float64)
        rng = np.random.default_rng(seed)
        self.scaler = AngleScaler().fit(X)
        angles = self.scaler.transform(X)
        self.theta = rng.uniform(-self.init_scale, self.init_scale, self.circ.n_params)
        opt = Adam(self.circ.n_params, lr=self.lr)
        self.train_losses = []
        for _ in range(self.epochs):
            loss, grad = self.loss_grad(angles, y)
            self.train_losses.append(loss)
            self.theta -= opt.step(grad)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.scaler is None:
            raise NotFitted("QnnModel.predict before fit")
        angles = self.scaler.transform(X)
        z0 = expectations(self.circ, self.theta, inputs=angles, qubits=[0])[:, 0]
        return 0.5 * (1.0 + z0)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "kind": "qnn",
            "n_qubits": self.n_qubits,
            "layers": self.layers,
            "theta": self.theta.tolist(),
        }
