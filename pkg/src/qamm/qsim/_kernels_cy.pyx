# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled gate kernels. Same contract as _kernels_py: batched
complex128 states of shape (B, 2**n), little endian, mutated in place."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

BACKEND_NAME = "cython"

ctypedef cnp.complex128_t cplx


def apply_rx(cplx[:, ::1] state, int q, double[::1] theta):
    cdef Py_ssize_t rows = state.shape[0]
    cdef Py_ssize_t half = state.shape[1] >> 1
    cdef Py_ssize_t low_mask = (1 << q) - 1
    cdef Py_ssize_t bit = 1 << q
    cdef Py_ssize_t r, g, i, j
    cdef double c, s
    cdef double complex a0, a1, im = 1j
    for r in range(rows):
        c = cos(0.5 * theta[r])
        s = sin(0.5 * theta[r])
        for g in range(half):
            i = ((g >> q) << (q + 1)) | (g & low_mask)
            j = i | bit
            a0 = state[r, i]
            a1 = state[r, j]
            state[r, i] = c * a0 - im * (s * a1)
            state[r, j] = c * a1 - im * (s * a0)


def apply_ry(cplx[:, ::1] state, int q, double[::1] theta):
    cdef Py_ssize_t rows = state.shape[0]
    cdef Py_ssize_t half = state.shape[1] >> 1
    cdef Py_ssize_t low_mask = (1 << q) - 1
    cdef Py_ssize_t bit = 1 << q
    cdef Py_ssize_t r, g, i, j
    cdef double c, s
    cdef double complex a0, a1
    for r in range(rows):
        c = cos(0.5 * theta[r])
        s = sin(0.5 * theta[r])
        for g in range(half):
            i = ((g >> q) << (q + 1)) | (g & low_mask)
            j = i | bit
            a0 = state[r, i]
            a1 = state[r, j]
            state[r, i] = c * a0 - s * a1
            state[r, j] = s * a0 + c * a1


def apply_rz(cplx[:, ::1] state, int q, double[::1] theta):
    cdef Py_ssize_t rows = state.shape[0]
    cdef Py_ssize_t half = state.shape[1] >> 1
    cdef Py_ssize_t low_mask = (1 << q) - 1
    cdef Py_ssize_t bit = 1 << q
    cdef Py_ssize_t r, g, i, j
    cdef double complex ph0, ph1
    for r in range(rows):
        ph0 = cos(0.5 * theta[r]) - 1j * sin(0.5 * theta[r])
        ph1 = cos(0.5 * theta[r]) + 1j * sin(0.5 * theta[r])
        for g in range(half):
            i = ((g >> q) << (q + 1)) | (g & low_mask)
            j = i | bit
            state[r, i] = state[r, i] * ph0
            state[r, j] = state[r, j] * ph1


def apply_cnot(cplx[:, ::1] state, int ctrl, int tgt):
    cdef Py_ssize_t rows = state.shape[0]
    cdef Py_ssize_t dim = state.shape[1]
    cdef Py_ssize_t cmask = 1 << ctrl
    cdef Py_ssize_t tmask = 1 << tgt
    cdef Py_ssize_t r, i, j
    cdef double complex tmp
    for r in range(rows):
        for i in range(dim):
            if (i & cmask) != 0 and (i & tmask) == 0:
                j = i | tmask
                tmp = state[r, i]
                state[r, i] = state[r, j]
                state[r, j] = tmp


def expect_z(cplx[:, ::1] state, int q):
    cdef Py_ssize_t rows = state.shape[0]
    cdef Py_ssize_t dim = state.shape[1]
    cdef Py_ssize_t bit = 1 << q
    cdef Py_ssize_t r, i
    cdef double acc, p
    out = np.empty(rows, dtype=np.float64)
    cdef double[::1] ov = out
    for r in range(rows):
        acc = 0.0
        for i in range(dim):
            p = state[r, i].real * state[r, i].real + state[r, i].imag * state[r, i].imag
            if i & bit:
                acc -= p
            else:
                acc += p
        ov[r] = acc
    return out
