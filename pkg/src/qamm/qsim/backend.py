"""Kernel backend selection.

The compiled Cython kernels are preferred; the numpy kernels are the
fallback when the extension was not built.  Set QAMM_PURE_PYTHON=1 to
force the fallback regardless (used by the parity tests and benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("QAMM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND_NAME

apply_rx = _impl.apply_rx
apply_ry = _impl.apply_ry
apply_rz = _impl.apply_rz
apply_cnot = _impl.apply_cnot
expect_z = _impl.expect_z
