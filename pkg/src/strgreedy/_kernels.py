"""Hot numeric kernels for the coverage objective.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics. The public names at the bottom of this
module are bound to one or the other at import time. Set
``STRGREEDY_DISABLE_NUMBA=1`` to force the numpy path (numba is also skipped
automatically when it cannot be imported).

Detection probabilities are recomputed on the fly as ``exp(-lam * dist)``
instead of materialising the ``n_candidates x n_points`` matrix, which is
what makes the fused loop worth compiling on large grids.
"""
import math
import os

import numpy as np

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested():
    return os.environ.get("STRGREEDY_DISABLE_NUMBA", "").strip().lower() in _FALSY


try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _numba_requested()

# rows of the candidate x point block processed at once by the numpy path
_NP_BLOCK = 256


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def coverage_gains_np(cand_xy, event_xy, weight, lam):
    """gains[c] = sum_x weight[x] * exp(-lam * |event_x - cand_c|)."""
    cand_xy = np.asarray(cand_xy, dtype=np.float64)
    event_xy = np.asarray(event_xy, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    out = np.empty(cand_xy.shape[0], dtype=np.float64)
    for lo in range(0, cand_xy.shape[0], _NP_BLOCK):
        block = cand_xy[lo:lo + _NP_BLOCK]
        dx = block[:, 0, None] - event_xy[None, :, 0]
        dy = block[:, 1, None] - event_xy[None, :, 1]
        out[lo:lo + _NP_BLOCK] = np.exp(-lam * np.sqrt(dx * dx + dy * dy)) @ weight
    return out


def coverage_residual_np(sensor_xy, event_xy, lam):
    """Per-point miss probability prod_i (1 - exp(-lam * |x - s_i|))."""
    sensor_xy = np.asarray(sensor_xy, dtype=np.float64).reshape(-1, 2)
    event_xy = np.asarray(event_xy, dtype=np.float64)
    residual = np.ones(event_xy.shape[0], dtype=np.float64)
    for sx, sy in sensor_xy:
        d = np.hypot(event_xy[:, 0] - sx, event_xy[:, 1] - sy)
        residual *= 1.0 - np.exp(-lam * d)
    return residual


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _coverage_gains_loop(cand_xy, event_xy, weight, lam):
    n = cand_xy.shape[0]
    m = event_xy.shape[0]
    out = np.empty(n, dtype=np.float64)
    for c in range(n):
        cx = cand_xy[c, 0]
        cy = cand_xy[c, 1]
        acc = 0.0
        for x in range(m):
            w = weight[x]
            if w == 0.0:
                continue
            dx = event_xy[x, 0] - cx
            dy = event_xy[x, 1] - cy
            acc += w * math.exp(-lam * math.sqrt(dx * dx + dy * dy))
        out[c] = acc
    return out


def _coverage_residual_loop(sensor_xy, event_xy, lam):
    m = event_xy.shape[0]
    residual = np.ones(m, dtype=np.float64)
    for i in range(sensor_xy.shape[0]):
        sx = sensor_xy[i, 0]
        sy = sensor_xy[i, 1]
        for x in range(m):
            dx = event_xy[x, 0] - sx
            dy = event_xy[x, 1] - sy
            residual[x] *= 1.0 - math.exp(-lam * math.sqrt(dx * dx + dy * dy))
    return residual


if HAS_NUMBA:
    _gains_nb = numba.njit(cache=True, nogil=True)(_coverage_gains_loop)
    _residual_nb = numba.njit(cache=True, nogil=True)(_coverage_residual_loop)

    def coverage_gains_nb(cand_xy, event_xy, weight, lam):
        return _gains_nb(np.ascontiguousarray(cand_xy, dtype=np.float64),
                         np.ascontiguousarray(event_xy, dtype=np.float64),
                         np.ascontiguousarray(weight, dtype=np.float64),
                         float(lam))

    def coverage_residual_nb(sensor_xy, event_xy, lam):
        sensor_xy = np.asarray(sensor_xy, dtype=np.float64).reshape(-1, 2)
        return _residual_nb(np.ascontiguousarray(sensor_xy),
                            np.ascontiguousarray(event_xy, dtype=np.float64),
                            float(lam))
else:  # pragma: no cover
    coverage_gains_nb = coverage_gains_np
    coverage_residual_nb = coverage_residual_np


if USE_NUMBA:
    coverage_gains = coverage_gains_nb
    coverage_residual = coverage_residual_nb
else:
    coverage_gains = coverage_gains_np
    coverage_residual = coverage_residual_np

BACKEND = "numba" if USE_NUMBA else "numpy"
