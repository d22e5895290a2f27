"""Select the trajectory kernel: compiled extension if built, else Python.

Set ``MEMS_PULLIN_BACKEND=python`` to force the pure-Python kernel.
"""
from __future__ import annotations

import os

from . import _pykernel

python_kernel = _pykernel.integrate_kernel

try:
    from ._ckernel import integrate_kernel as compiled_kernel
except ImportError:  # extension not built
    compiled_kernel = None

if compiled_kernel is not None and os.environ.get("MEMS_PULLIN_BACKEND", "").lower() != "python":
    integrate_kernel = compiled_kernel
    BACKEND = "cython"
else:
    integrate_kernel = python_kernel
    BACKEND = "python"
