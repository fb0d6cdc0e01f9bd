"""Numpy gate kernels over batched statevectors.

A batch of states is a C-contiguous complex128 array of shape (B, 2**n)
in little endian order: qubit 0 is the least significant bit of the
amplitude index.  All kernels mutate the batch in place.  Rotation
angles are per-row arrays of shape (B,).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _pair_view(state: np.ndarray, q: int) -> np.ndarray:
    b, dim = state.shape
    return state.reshape(b, dim >> (q + 1), 2, 1 << q)


def apply_rx(state: np.ndarray, q: int, theta: np.ndarray) -> None:
    view = _pair_view(state, q)
    c = np.cos(0.5 * theta)[:, None, None]
    s = np.sin(0.5 * theta)[:, None, None]
    a0 = view[:, :, 0, :].copy()
    a1 = view[:, :, 1, :]
    view[:, :, 0, :] = c * a0 - 1j * (s * a1)
    view[:, :, 1, :] = c * a1 - 1j * (s * a0)


def apply_ry(state: np.ndarray, q: int, theta: np.ndarray) -> None:
    view = _pair_view(state, q)
    c = np.cos(0.5 * theta)[:, None, None]
    s = np.sin(0.5 * theta)[:, None, None]
    a0 = view[:, :, 0, :].copy()
    a1 = view[:, :, 1, :]
    view[:, :, 0, :] = c * a0 - s * a1
    view[:, :, 1, :] = s * a0 + c * a1


def apply_rz(state: np.ndarray, q: int, theta: np.ndarray) -> None:
    view = _pair_view(state, q)
    phase = np.exp(-0.5j * theta)[:, None, None]
    view[:, :, 0, :] *= phase
    view[:, :, 1, :] *= np.conj(phase)


def apply_cnot(state: np.ndarray, ctrl: int, tgt: int) -> None:
    b, dim = state.shape
    n = dim.bit_length() - 1
    view = state.reshape((b,) + (2,) * n)
    # Little endian: qubit k lives on axis 1 + (n - 1 - k).
    ax_c = 1 + (n - 1 - ctrl)
    ax_t = 1 + (n - 1 - tgt)
    sel: list = [slice(None)] * (n + 1)
    sel[ax_c] = 1
    sub = view[tuple(sel)]
    ax_t_sub = ax_t - 1 if ax_t > ax_c else ax_t
    i0: list = [slice(None)] * n
    i1: list = [slice(None)] * n
    i0[ax_t_sub] = 0
    i1[ax_t_sub] = 1
    tmp = sub[tuple(i0)].copy()
    sub[tuple(i0)] = sub[tuple(i1)]
    sub[tuple(i1)] = tmp


def expect_z(state: np.ndarray, q: int) -> np.ndarray:
    """<Z_q> per batch row, computed exactly from amplitudes."""
    view = _pair_view(state, q)
    probs = view.real ** 2 + view.imag ** 2
    return probs[:, :, 0, :].sum(axis=(1, 2)) - probs[:, :, 1, :].sum(axis=(1, 2))
