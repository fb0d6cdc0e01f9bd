"""Embedded statevector simulator: exact amplitudes, no sampling noise."""

from .backend import BACKEND, apply_cnot, apply_rx, apply_ry, apply_rz, expect_z
from .circuits import (
    MAX_QUBITS,
    Circuit,
    CircuitBuilder,
    expect_all,
    get_template,
    qasa_template,
    qnn_template,
    qrwkv_template,
    run,
    ry_product_template,
    vqe_template,
)
from .encode import AngleScaler, amplitude_encode
from .fidelity import fidelity_kernel, rbf_kernel, scale_gamma
from .shift import (
    amplitude_forward,
    amplitude_input_grad,
    expectations,
    input_jacobian,
    param_jacobian,
)

__all__ = [
    "BACKEND",
    "MAX_QUBITS",
    "AngleScaler",
    "Circuit",
    "CircuitBuilder",
    "amplitude_encode",
    "amplitude_forward",
    "amplitude_input_grad",
    "apply_cnot",
    "apply_rx",
    "apply_ry",
    "apply_rz",
    "expect_all",
    "expect_z",
    "expectations",
    "fidelity_kernel",
    "get_template",
    "input_jacobian",
    "param_jacobian",
    "qasa_template",
    "qnn_template",
    "qrwkv_template",
    "rbf_kernel",
    "run",
    "ry_product_template",
    "scale_gamma",
    "vqe_template",
]
