"""Kernel backend selection: compiled extension with pure-numpy fallback.

The compiled module is preferred when importable; set ``PDCOMP_PURE_PYTHON=1``
to force the fallback.  ``impl`` is rebindable via :func:`use_backend` so the
benchmark suite can time both backends in one process.
"""

import os

from . import kernels_py

if os.environ.get("PDCOMP_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

impl = _compiled if _compiled is not None else kernels_py

HAVE_EXTENSION = _compiled is not None


def backend_name():
    return "compiled" if impl is _compiled and _compiled is not None else "pure-python"


def use_backend(name):
    """Select the kernel backend: 'compiled' or 'pure-python'."""
    global impl
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available in this build")
        impl = _compiled
    elif name == "pure-python":
        impl = kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
