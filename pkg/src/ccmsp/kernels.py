"""Backend selection for the run loops.

The compiled extension is used when it imports; otherwise, or when
``CCMSP_PURE_PYTHON`` is set to a non-empty value, the pure-Python twin is used.
"""

import os

from . import _pykernels

python_backend = _pykernels

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("CCMSP_PURE_PYTHON"):
    active = compiled_backend
    BACKEND = "cython"
else:
    active = _pykernels
    BACKEND = "python"


def get(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python' or None for the active one)."""
    if name is None:
        return active
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise RuntimeError("the compiled kernels are not built; run `pip install -e .`")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")
