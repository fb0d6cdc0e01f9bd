"""Autograd bridge between torch and the statevector simulator.

Each wrapped call runs the circuit forward in numpy, then supplies
backward gradients from the parameter-shift rule (circuit params),
the input-shift rule (angle inputs), or the adjoint identity
(amplitude-encoded inputs), so hybrid models train end to end with
torch doing the classical bookkeeping.  Everything stays float64 on
CPU; circuit state never enters the torch graph.
"""

from __future__ import annotations

import numpy as np
import torch

from ..qsim import (
    amplitude_forward,
    amplitude_input_grad,
    expectations,
    input_jacobian,
    param_jacobian,
)


def _np(t: torch.Tensor) -> np.ndarray:
    return t.detach().cpu().numpy().astype(np.float64)


class _AngleCircuitFn(torch.autograd.Function):
    @staticmethod
    def forward(ctx, angles, theta, circ):
        a = _np(angles)
        th = _np(theta)
        z = expectations(circ, th, inputs=a)
        ctx.circ, ctx.a, ctx.th = circ, a, th
        return torch.from_numpy(z)

    @staticmethod
    def backward(ctx, grad_z):
        g = _np(grad_z)
        grad_angles = grad_theta = None
        if ctx.needs_input_grad[0]:
            ji = input_jacobian(ctx.circ, ctx.th, ctx.a)
            grad_angles = torch.from_numpy(np.einsum("bo,boi->bi", g, ji))
        if ctx.needs_input_grad[1]:
            jp = param_jacobian(ctx.circ, ctx.th, inputs=ctx.a)
            grad_theta = torch.from_numpy(np.einsum("bo,boj->j", g, jp))
        return grad_angles, grad_theta, None


class _AmplitudeCircuitFn(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x, theta, circ):
        xn = _np(x)
        th = _np(theta)
        z, psi, phi = amplitude_forward(circ, th, xn)
        ctx.circ, ctx.x, ctx.th = circ, xn, th
        ctx.psi, ctx.phi, ctx.z = psi, phi, z
        return torch.from_numpy(z)

    @staticmethod
    def backward(ctx, grad_z):
        g = _np(grad_z)
        grad_x = grad_theta = None
        if ctx.needs_input_grad[0]:
            grad_x = torch.from_numpy(amplitude_input_grad(
                ctx.circ, ctx.th, ctx.x, g,
                psi=ctx.psi, phi=ctx.phi, z=ctx.z,
            ))
        if ctx.needs_input_grad[1]:
            jp = param_jacobian(ctx.circ, ctx.th, init_state=ctx.psi)
            grad_theta = torch.from_numpy(np.einsum("bo,boj->j", g, jp))
        return grad_x, grad_theta, None


class QuantumLayer(torch.nn.Module):
    """A trainable circuit as a torch layer.

    Angle templates map (B, n_inputs) angles to (B, n) expectations;
    amplitude templates map raw (B, d) vectors with d <= 2^n.  The
    circuit parameters are ordinary torch parameters so optimizers can
    put them in their own learning-rate group.
    """

    def __init__(self, circ, seed: int = 0, init_scale: float = 0.1):
        super().__init__()
        self.circ = circ
        rng = np.random.default_rng(seed)
        init = rng.uniform(-init_scale, init_scale, circ.n_params)
        self.theta = torch.nn.Parameter(torch.from_numpy(init))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        fn = _AmplitudeCircuitFn if self.circ.amplitude_init else _AngleCircuitFn
        return fn.apply(x, self.theta, self.circ)

    def extra_repr(self) -> str:
        return f"circuit={self.circ.name}, params={self.circ.n_params}"


def quantum_parameters(module: torch.nn.Module):
    """The circuit parameters of every QuantumLayer under module."""
    out = []
    for m in module.modules():
        if isinstance(m, QuantumLayer):
            out.append(m.theta)
    return out
