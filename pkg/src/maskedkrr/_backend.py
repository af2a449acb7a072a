"""Routes each hot path to its stronger implementation.

Two twins exist: ``_core_py`` (numpy; pair sums ride on BLAS matmuls) and
``_core_cy`` (compiled fused loops). Benchmarks (benchmarks/bench_core.py)
show BLAS dominating the pairwise masked sums by 10-100x while the compiled
loop dominates the streaming column moments by a similar margin, so ``auto``
splits the routing accordingly. MASKEDKRR_BACKEND=py|cy forces one twin for
everything (cy raises if the extension is not built).
"""

import os

import numpy as np

from . import _core_py

_choice = os.environ.get("MASKEDKRR_BACKEND", "auto").lower()
if _choice not in ("auto", "py", "cy"):
    raise ValueError(f"MASKEDKRR_BACKEND must be auto, py or cy, got {_choice!r}")

_core_cy = None
if _choice in ("auto", "cy"):
    try:
        from . import _core_cy
    except ImportError:
        if _choice == "cy":
            raise

if _choice == "py" or _core_cy is None:
    _pair_impl = _core_py
    _moment_impl = _core_py
    backend_name = "py"
elif _choice == "cy":
    _pair_impl = _core_cy
    _moment_impl = _core_cy
    backend_name = "cy"
else:
    _pair_impl = _core_py
    _moment_impl = _core_cy
    backend_name = "blas+cy"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _u8(a):
    return np.ascontiguousarray(np.asarray(a), dtype=np.uint8)


def masked_dot_norms(xl, ml, xr, mr):
    return _pair_impl.masked_dot_norms(_f64(xl), _u8(ml), _f64(xr), _u8(mr))


def masked_column_moments(x, presence):
    return _moment_impl.masked_column_moments(_f64(x), _u8(presence))


def welford_stream(x):
    return _moment_impl.welford_stream(_f64(np.ravel(x)))
