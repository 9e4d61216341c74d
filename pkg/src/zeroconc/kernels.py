"""Backend selection for the inner loops.

The compiled extension is used when it imports; otherwise the numpy twin.
Set ``ZEROCONC_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _pykernels as python_impl

try:
    from . import _ckernels as compiled_impl
except ImportError:  # extension not built
    compiled_impl = None

if compiled_impl is not None and not os.environ.get("ZEROCONC_PURE_PYTHON"):
    _impl = compiled_impl
    BACKEND = "cython"
else:
    _impl = python_impl
    BACKEND = "python"



def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _c128(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


def count_flips(v):
    """(strict sign flips, exact zeros) along a 1-d sample."""
    return _impl.count_flips(_f64(v))


def count_flips_columns(x):
    """Sign flips down each column of a (n_t, n_paths) block."""
    return _impl.count_flips_columns(_f64(x))


def trig_sum(lam, a, b, t):
    """sum_j a_j cos(lam_j t) + b_j sin(lam_j t)."""
    return _impl.trig_sum(_f64(lam), _f64(a), _f64(b), _f64(np.atleast_1d(t)))


def refine_roots(lam, a, b, left, right, iters=52):
    """Bisection of a trig sum inside bracketing cells."""
    return _impl.refine_roots(_f64(lam), _f64(a), _f64(b),
                              _f64(np.atleast_1d(left)), _f64(np.atleast_1d(right)), int(iters))


def eval_field(lam, a, b, x, y):
    """Trig sum continued to complex z = x + iy."""
    x, y = np.broadcast_arrays(np.atleast_1d(np.asarray(x, dtype=float)),
                               np.atleast_1d(np.asarray(y, dtype=float)))
    return _impl.eval_field(_f64(lam), _f64(a), _f64(b), _f64(x), _f64(y))


def winding(f):
    """(turns, largest argument step) of a closed contour sample."""
    return _impl.winding(_c128(f))


def permanent(A):
    return complex(_impl.permanent(_c128(A)))


def hafnian(A):
    return complex(_impl.hafnian(_c128(A)))


__all__ = [
    "BACKEND",
    "compiled_impl",
    "python_impl",
    "count_flips",
    "count_flips_columns",
    "trig_sum",
    "refine_roots",
    "eval_field",
    "winding",
    "permanent",
    "hafnian",
]
