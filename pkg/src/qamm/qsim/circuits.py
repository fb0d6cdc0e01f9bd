"""Circuit representation, templates, and the batched executor.

A circuit is a flat gate table.  Each rotation gate takes its angle from
a constant, a trainable parameter, or an input column, as
angle = scale * source + offset, which covers encoding maps like
RZ(x/2) without special cases.  Gate set: RX, RY, RZ, CNOT.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import QubitCountExceeded
from . import backend

MAX_QUBITS = 12

GATE_RX, GATE_RY, GATE_RZ, GATE_CNOT = 0, 1, 2, 3
SRC_CONST, SRC_PARAM, SRC_INPUT = 0, 1, 2

_ROTATIONS = {
    GATE_RX: backend.apply_rx,
    GATE_RY: backend.apply_ry,
    GATE_RZ: backend.apply_rz,
}


@dataclass
class Circuit:
    """Frozen gate table; build through CircuitBuilder."""

    name: str
    n: int
    kind: np.ndarray
    q: np.ndarray
    ctrl: np.ndarray
    src: np.ndarray
    idx: np.ndarray
    scale: np.ndarray
    offset: np.ndarray
    n_params: int
    n_inputs: int
    amplitude_init: bool = False

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def n_gates(self) -> int:
        return int(self.kind.shape[0])

    def param_gate_indices(self, param: int) -> np.ndarray:
        return np.nonzero((self.src == SRC_PARAM) & (self.idx == param))[0]

    def input_gate_indices(self, inp: int) -> np.ndarray:
        return np.nonzero((self.src == SRC_INPUT) & (self.idx == inp))[0]


@dataclass
class CircuitBuilder:
    name: str
    n: int
    n_params: int = 0
    n_inputs: int = 0
    amplitude_init: bool = False
    _rows: list = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.n < 1 or self.n > MAX_QUBITS:
            raise QubitCountExceeded(f"{self.n} qubits (cap {MAX_QUBITS})")

    def _rot(self, kind: int, q: int, src: int, idx: int, scale: float, offset: float) -> None:
        assert 0 <= q < self.n
        self._rows.append((kind, q, -1, src, idx, scale, offset))

    def rx(self, q, *, param=None, inp=None, const=0.0, scale=1.0):
        self._add_rot(GATE_RX, q, param, inp, const, scale)

    def ry(self, q, *, param=None, inp=None, const=0.0, scale=1.0):
        self._add_rot(GATE_RY, q, param, inp, const, scale)

    def rz(self, q, *, param=None, inp=None, const=0.0, scale=1.0):
        self._add_rot(GATE_RZ, q, param, inp, const, scale)

    def _add_rot(self, kind, q, param, inp, const, scale) -> None:
        if param is not None:
            self._rot(kind, q, SRC_PARAM, param, scale, 0.0)
        elif inp is not None:
            self._rot(kind, q, SRC_INPUT, inp, scale, 0.0)
        else:
            self._rot(kind, q, SRC_CONST, -1, 0.0, const)

    def cnot(self, ctrl: int, tgt: int) -> None:
        assert 0 <= ctrl < self.n and 0 <= tgt < self.n and ctrl != tgt
        self._rows.append((GATE_CNOT, tgt, ctrl, SRC_CONST, -1, 0.0, 0.0))

    def build(self) -> Circuit:
        rows = self._rows
        return Circuit(
            name=self.name,
            n=self.n,
            kind=np.array([r[0] for r in rows], dtype=np.int8),
            q=np.array([r[1] for r in rows], dtype=np.int32),
            ctrl=np.array([r[2] for r in rows], dtype=np.int32),
            src=np.array([r[3] for r in rows], dtype=np.int8),
            idx=np.array([r[4] for r in rows], dtype=np.int32),
            scale=np.array([r[5] for r in rows], dtype=np.float64),
            offset=np.array([r[6] for r in rows], dtype=np.float64),
            n_params=self.n_params,
            n_inputs=self.n_inputs,
            amplitude_init=self.amplitude_init,
        )


def _gate_angles(
    circ: Circuit, g: int, params: np.ndarray, inputs: np.ndarray | None, batch: int
) -> np.ndarray:
    src = circ.src[g]
    if src == SRC_PARAM:
        base = circ.scale[g] * params[circ.idx[g]]
        return np.full(batch, base, dtype=np.float64)
    if src == SRC_INPUT:
        assert inputs is not None
        return np.ascontiguousarray(circ.scale[g] * inputs[:, circ.idx[g]], dtype=np.float64)
    return np.full(batch, circ.offset[g], dtype=np.float64)


def run(
    circ: Circuit,
    params: np.ndarray,
    inputs: np.ndarray | None = None,
    init_state: np.ndarray | None = None,
    shift_gate: int = -1,
    shift_delta: float = 0.0,
    reverse: bool = False,
) -> np.ndarray:
    """Execute the circuit on a batch and return final states (B, 2**n).

    init_state, when given, must be a normalized (B, 2**n) complex array
    and is copied, not mutated.  reverse=True applies the inverse
    circuit (gates reversed, rotation angles negated) instead, which is
    what the amplitude-encoding backward pass needs.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circ.n_params,):
        raise ValueError(f"expected {circ.n_params} params, got {params.shape}")
    if inputs is not None:
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.ndim != 2 or inputs.shape[1] != circ.n_inputs:
            raise ValueError(f"inputs must be (B, {circ.n_inputs})")

    if init_state is not None:
        states = np.array(init_state, dtype=np.complex128, copy=True, order="C")
        if states.ndim != 2 or states.shape[1] != circ.dim:
            raise ValueError(f"init_state must be (B, {circ.dim})")
        batch = states.shape[0]
        if inputs is not None and inputs.shape[0] != batch:
            raise ValueError("inputs and init_state batch sizes differ")
    else:
        batch = inputs.shape[0] if inputs is not None else 1
        states = np.zeros((batch, circ.dim), dtype=np.complex128)
        states[:, 0] = 1.0

    order = range(circ.n_gates - 1, -1, -1) if reverse else range(circ.n_gates)
    sign = -1.0 if reverse else 1.0
    for g in order:
        kind = circ.kind[g]
        if kind == GATE_CNOT:
            backend.apply_cnot(states, int(circ.ctrl[g]), int(circ.q[g]))
            continue
        theta = _gate_angles(circ, g, params, inputs, batch)
        if g == shift_gate:
            theta = theta + shift_delta
        if sign < 0:
            theta = -theta
        _ROTATIONS[kind](states, int(circ.q[g]), theta)
    return states


def expect_all(states: np.ndarray, qubits: list[int] | range) -> np.ndarray:
    """<Z_q> for each listed qubit, shape (B, len(qubits))."""
    return np.stack([backend.expect_z(states, int(q)) for q in qubits], axis=1)


def parity_signs(n: int, qubits: list[int] | range) -> np.ndarray:
    """Rows of +-1: sign of Z_q on each basis state, shape (len(qubits), 2**n)."""
    basis = np.arange(1 << n)
    return np.stack([1.0 - 2.0 * ((basis >> int(q)) & 1) for q in qubits]).astype(np.float64)


# ---------------------------------------------------------------------------
# Templates


def vqe_template(n: int = 6, layers: int = 2) -> Circuit:
    """RY angle encoding, then per layer RY rotations and a CNOT chain."""
    b = CircuitBuilder(f"vqe{n}x{layers}", n, n_params=n * layers, n_inputs=n)
    for i in range(n):
        b.ry(i, inp=i)
    for l in range(layers):
        for i in range(n):
            b.ry(i, param=l * n + i)
        for i in range(n - 1):
            b.cnot(i, i + 1)
    return b.build()


def qnn_template(n: int = 6, layers: int = 3) -> Circuit:
    """RY(x) RZ(x/2) feature map, then layers of RY+RZ and a CNOT chain."""
    b = CircuitBuilder(f"qnn{n}x{layers}", n, n_params=2 * n * layers, n_inputs=n)
    for i in range(n):
        b.ry(i, inp=i)
        b.rz(i, inp=i, scale=0.5)
    for l in range(layers):
        for i in range(n):
            b.ry(i, param=l * 2 * n + i)
            b.rz(i, param=l * 2 * n + n + i)
        for i in range(n - 1):
            b.cnot(i, i + 1)
    return b.build()


def qasa_template(n: int, layers: int = 2) -> Circuit:
    """Amplitude-initialized ansatz: per layer RY rotations and a CNOT chain."""
    b = CircuitBuilder(f"qasa_ry{n}x{layers}", n, n_params=n * layers, amplitude_init=True)
    for l in range(layers):
        for i in range(n):
            b.ry(i, param=l * n + i)
        for i in range(n - 1):
            b.cnot(i, i + 1)
    return b.build()


def qrwkv_template(n: int = 4) -> Circuit:
    """Two RX encoding layers, CNOT ring, trainable RX layer, CNOT ring."""
    b = CircuitBuilder(f"qrwkv_rx{n}", n, n_params=n, n_inputs=2 * n)
    for i in range(n):
        b.rx(i, inp=i)
    for i in range(n):
        b.rx(i, inp=n + i)
    for i in range(n):
        b.cnot(i, (i + 1) % n)
    for i in range(n):
        b.rx(i, param=i)
    for i in range(n):
        b.cnot(i, (i + 1) % n)
    return b.build()


def ry_product_template(n: int) -> Circuit:
    """Product feature map RY(x_i) on each qubit; used by the fidelity kernel."""
    b = CircuitBuilder(f"ry_product{n}", n, n_params=0, n_inputs=n)
    for i in range(n):
        b.ry(i, inp=i)
    return b.build()


def get_template(name: str) -> Circuit:
    """Look up a template by its string id, e.g. qnn6x3 or qasa_ry4x2."""
    for prefix, fn in (
        ("vqe", vqe_template),
        ("qnn", qnn_template),
        ("qasa_ry", qasa_template),
    ):
        if name.startswith(prefix):
            body = name[len(prefix):]
            parts = body.split("x")
            if len(parts) == 2 and all(p.isdigit() for p in parts):
                return fn(int(parts[0]), int(parts[1]))
    if name.startswith("qrwkv_rx") and name[len("qrwkv_rx"):].isdigit():
        return qrwkv_template(int(name[len("qrwkv_rx"):]))
    if name.startswith("ry_product") and name[len("ry_product"):].isdigit():
        return ry_product_template(int(name[len("ry_product"):]))
    raise KeyError(f"unknown circuit template {name!r}")
