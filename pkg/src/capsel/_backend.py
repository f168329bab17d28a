"""Pick the compiled kernels when available, the numpy ones otherwise.

Set ``CAPSEL_PURE_PYTHON=1`` to force the numpy implementations.
"""
import os

from . import _pykernels

if os.environ.get("CAPSEL_PURE_PYTHON"):
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _pykernels

NAME = kernels.NAME
