"""Exact gradients for circuit expectation values.

Rotation-angle derivatives use the parameter-shift rule
df/dtheta = (f(theta + pi/2) - f(theta - pi/2)) / 2, summed over every
gate that reads the same parameter (with the gate's angle scale applied
by the chain rule).  Amplitude-encoded inputs get an analytic adjoint
gradient: one inverse-circuit application per backward pass instead of
a shift per input dimension.
"""

from __future__ import annotations

import math

import numpy as np

from . import circuits
from .circuits import Circuit
from .encode import amplitude_encode

HALF_PI = 0.5 * math.pi


def _resolve_qubits(circ: Circuit, qubits) -> list[int]:
    return list(range(circ.n)) if qubits is None else [int(q) for q in qubits]


def expectations(
    circ: Circuit,
    params: np.ndarray,
    inputs: np.ndarray | None = None,
    init_state: np.ndarray | None = None,
    qubits=None,
) -> np.ndarray:
    """<Z_q> per batch row for each observed qubit, shape (B, n_obs)."""
    states = circuits.run(circ, params, inputs=inputs, init_state=init_state)
    return circuits.expect_all(states, _resolve_qubits(circ, qubits))


def _shift_pair(circ, params, inputs, init_state, qubits, gate) -> np.ndarray:
    plus = circuits.run(
        circ, params, inputs=inputs, init_state=init_state,
        shift_gate=gate, shift_delta=HALF_PI,
    )
    minus = circuits.run(
        circ, params, inputs=inputs, init_state=init_state,
        shift_gate=gate, shift_delta=-HALF_PI,
    )
    qs = _resolve_qubits(circ, qubits)
    return 0.5 * (circuits.expect_all(plus, qs) - circuits.expect_all(minus, qs))


def param_jacobian(
    circ: Circuit,
    params: np.ndarray,
    inputs: np.ndarray | None = None,
    init_state: np.ndarray | None = None,
    qubits=None,
) -> np.ndarray:
    """d<Z_q>/d(param_j), shape (B, n_obs, n_params)."""
    if inputs is not None:
        batch = np.asarray(inputs).shape[0]
    elif init_state is not None:
        batch = np.asarray(init_state).shape[0]
    else:
        batch = 1
    n_obs = len(_resolve_qubits(circ, qubits))
    jac = np.zeros((batch, n_obs, circ.n_params))
    for g in range(circ.n_gates):
        if circ.src[g] != circuits.SRC_PARAM:
            continue
        contrib = _shift_pair(circ, params, inputs, init_state, qubits, g)
        jac[:, :, circ.idx[g]] += circ.scale[g] * contrib
    return jac


def input_jacobian(
    circ: Circuit,
    params: np.ndarray,
    inputs: np.ndarray,
    qubits=None,
) -> np.ndarray:
    """d<Z_q>/d(input_i) for angle-encoded inputs, shape (B, n_obs, n_inputs)."""
    batch = np.asarray(inputs).shape[0]
    n_obs = len(_resolve_qubits(circ, qubits))
    jac = np.zeros((batch, n_obs, circ.n_inputs))
    for g in range(circ.n_gates):
        if circ.src[g] != circuits.SRC_INPUT:
            continue
        contrib = _shift_pair(circ, params, inputs, None, qubits, g)
        jac[:, :, circ.idx[g]] += circ.scale[g] * contrib
    return jac


def amplitude_forward(
    circ: Circuit, params: np.ndarray, x: np.ndarray, qubits=None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run an amplitude-initialized circuit on raw vectors x (B, d).

    Returns (z, psi, phi): expectations, the encoded input states, and
    the output states, the latter two kept for the backward pass.
    """
    psi, _ = amplitude_encode(x, n=circ.n)
    phi = circuits.run(circ, params, init_state=psi)
    z = circuits.expect_all(phi, _resolve_qubits(circ, qubits))
    return z, psi, phi


def amplitude_input_grad(
    circ: Circuit,
    params: np.ndarray,
    x: np.ndarray,
    cotangent: np.ndarray,
    qubits=None,
    psi: np.ndarray | None = None,
    phi: np.ndarray | None = None,
    z: np.ndarray | None = None,
) -> np.ndarray:
    """dL/dx for L = sum_i cotangent_i * <Z_i> with amplitude-encoded x.

    Uses the adjoint identity: with psi = x/|x|, phi = U psi and
    D = diag(sum_i cotangent_i * sign_i), the unnormalized gradient is
    2 Re(U^dag D phi); normalization projects out the radial component.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    qs = _resolve_qubits(circ, qubits)
    if psi is None or phi is None:
        z, psi, phi = amplitude_forward(circ, params, x, qubits=qs)
    elif z is None:
        z = circuits.expect_all(phi, qs)
    cot = np.atleast_2d(np.asarray(cotangent, dtype=np.float64))
    signs = circuits.parity_signs(circ.n, qs)
    weighted = (cot @ signs) * phi
    chi = circuits.run(circ, params, init_state=weighted, reverse=True)
    grad_psi = 2.0 * chi.real
    # psi^T grad_psi = 2 L; the radial component is projected out because
    # the encoding normalizes x.
    radial = 2.0 * (cot * z).sum(axis=1)
    norms = np.linalg.norm(x, axis=1)
    grad = (grad_psi - psi.real * radial[:, None]) / norms[:, None]
    return grad[:, : x.shape[1]]
