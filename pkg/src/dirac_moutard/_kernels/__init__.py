"""Hot kernels with a compiled core and a pure NumPy fallback.

The compiled extension is used when it was built and ``DIRAC_MOUTARD_PURE``
is not set to a truthy value. ``BACKEND`` names the active implementation.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("DIRAC_MOUTARD_PURE", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

propagate_signs = _impl.propagate_signs
cumtrapz_canonical = _impl.cumtrapz_canonical
mat2_mul = _impl.mat2_mul
mat2_inv = _impl.mat2_inv

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "propagate_signs",
    "cumtrapz_canonical",
    "mat2_mul",
    "mat2_inv",
]
