"""Hot loops, each with a numba implementation and a pure-numpy fallback.

The backend is chosen at import time from ``MPRSAMPLING_BACKEND``
(``numba`` or ``numpy``); numba is used when it is importable and the variable
is unset. :func:`set_backend` / :func:`use_backend` switch at runtime.

Both backends consume identical inputs, so simulation kernels give
bit-identical output. Grid kernels may differ in the last ulp of the objective
(matmul vs explicit sums) but share the tie-breaking rule: first minimum in
row-major ``(i, j)`` order.
"""

from __future__ import annotations

import contextlib
import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    # TBB is probed first by default and warns on older system TBB builds.
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "omp"
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

ENV_VAR = "MPRSAMPLING_BACKEND"
BACKENDS = ("numba", "numpy")

_backend = None


def _initial_backend():
    name = os.environ.get(ENV_VAR, "").strip().lower()
    if not name:
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"{ENV_VAR}={name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError(f"{ENV_VAR}=numba but numba is not installed")
    return name


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


_backend = _initial_backend()


# ---------------------------------------------------------------------------
# grid search over policy pairs

CHUNK_ROWS = 128
CAP_TOL = 1e-12


def _grid_argmin_numpy(am1, am2, b, rate_a, rate_b, params, airtime_cap):
    a1, b1, a2, b2, w1, w2 = params
    s1, s2 = a1 + b1, a2 + b2
    c1, c2 = 2.0 * a1 * b1, 2.0 * a2 * b2
    bt = np.ascontiguousarray(b.T)
    best_val, best_i, best_j = np.inf, -1, -1
    for start in range(0, am1.shape[0], CHUNK_ROWS):
        stop = min(start + CHUNK_ROWS, am1.shape[0])
        q1 = am1[start:stop] @ bt
        q2 = am2[start:stop] @ bt
        e = w1 * (c1 * (1.0 - q1) / (s1 * (s1 - q1 * (s1 - 1.0))))
        e += w2 * (c2 * (1.0 - q2) / (s2 * (s2 - q2 * (s2 - 1.0))))
        if np.isfinite(airtime_cap):
            e[rate_a[start:stop, None] + rate_b[None, :] > airtime_cap + CAP_TOL] = np.inf
        flat = int(np.argmin(e))
        v = e.flat[flat]
        if v < best_val:
            best_val = float(v)
            best_i, best_j = start + flat // e.shape[1], flat % e.shape[1]
    return best_i, best_j, best_val


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _grid_argmin_numba(am1, am2, b, rate_a, rate_b, params, airtime_cap):
        a1, b1, a2, b2, w1, w2 = params[0], params[1], params[2], params[3], params[4], params[5]
        s1, s2 = a1 + b1, a2 + b2
        c1, c2 = 2.0 * a1 * b1, 2.0 * a2 * b2
        n1, n2 = am1.shape[0], b.shape[0]
        row_val = np.full(n1, np.inf)
        row_j = np.full(n1, -1, dtype=np.int64)
        capped = np.isfinite(airtime_cap)
        for i in prange(n1):
            bv = np.inf
            bj = -1
            for j in range(n2):
                if capped and rate_a[i] + rate_b[j] > airtime_cap + CAP_TOL:
                    continue
                q1 = am1[i, 0] * b[j, 0] + am1[i, 1] * b[j, 1] + am1[i, 2] * b[j, 2]
                q2 = am2[i, 0] * b[j, 0] + am2[i, 1] * b[j, 1] + am2[i, 2] * b[j, 2]
                e = w1 * (c1 * (1.0 - q1) / (s1 * (s1 - q1 * (s1 - 1.0))))
                e += w2 * (c2 * (1.0 - q2) / (s2 * (s2 - q2 * (s2 - 1.0))))
                if e < bv:
                    bv = e
                    bj = j
            row_val[i] = bv
            row_j[i] = bj
        best_val = np.inf
        best_i = -1
        for i in range(n1):
            if row_val[i] < best_val:
                best_val = row_val[i]
                best_i = i
        best_j = -1 if best_i < 0 else row_j[best_i]
        return best_i, best_j, best_val


def grid_argmin(a, b, m1, m2, params, airtime_cap=np.inf):
    """Minimize the weighted RTE over all pairs ``(a[i], b[j])``.

    ``a``, ``b``: policy rows ``(silent, sample_1, sample_2)``.
    ``m1``, ``m2``: bilinear update-probability forms.
    ``params``: ``(alpha_1, beta_1, alpha_2, beta_2, w_1, w_2)``.
    Pairs whose combined transmit rate exceeds ``airtime_cap`` are skipped.
    Returns ``(i, j, value)``; ``i = j = -1`` when nothing is feasible.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    am1 = np.ascontiguousarray(a @ m1)
    am2 = np.ascontiguousarray(a @ m2)
    rate_a = a[:, 1] + a[:, 2]
    rate_b = b[:, 1] + b[:, 2]
    params = np.asarray(params, dtype=np.float64)
    fn = _grid_argmin_numba if _backend == "numba" else _grid_argmin_numpy
    i, j, v = fn(am1, am2, b, rate_a, rate_b, params, float(airtime_cap))
    return int(i), int(j), float(v)


# ---------------------------------------------------------------------------
# slot recursions for the simulator


def _propagate_source_numpy(u, alpha, beta, x0):
    # next state is 1 iff (x=0 and u<alpha) or (x=1 and u>=beta). When both
    # branches agree the step resets the state; otherwise it flips (u below
    # both thresholds) or keeps it.
    up = u < alpha
    stay1 = u >= beta
    reset = up == stay1
    flip = up & ~stay1
    n = u.shape[0]
    parity = np.cumsum(flip, dtype=np.int64) & 1
    idx = np.where(reset, np.arange(n), -1)
    last = np.maximum.accumulate(idx)
    base = np.where(last >= 0, up[np.maximum(last, 0)].astype(np.int64), x0)
    base_parity = np.where(last >= 0, parity[np.maximum(last, 0)], 0)
    return (base ^ parity ^ base_parity).astype(np.int8)


def _hold_estimate_numpy(x, upd, xhat0):
    n = x.shape[0]
    idx = np.where(upd, np.arange(n), -1)
    last = np.maximum.accumulate(idx)
    return np.where(last >= 0, x[np.maximum(last, 0)], xhat0).astype(np.int8)


if HAVE_NUMBA:

    @njit(cache=True)
    def _propagate_source_numba(u, alpha, beta, x0):
        n = u.shape[0]
        out = np.empty(n, dtype=np.int8)
        x = x0
        for t in range(n):
            if x == 0:
                x = 1 if u[t] < alpha else 0
            else:
                x = 0 if u[t] < beta else 1
            out[t] = x
        return out

    @njit(cache=True)
    def _hold_estimate_numba(x, upd, xhat0):
        n = x.shape[0]
        out = np.empty(n, dtype=np.int8)
        xh = xhat0
        for t in range(n):
            if upd[t]:
                xh = x[t]
            out[t] = xh
        return out


def propagate_source(u, alpha, beta, x0):
    """Source path ``X(1..n)`` from ``X(0) = x0`` driven by uniforms ``u``."""
    fn = _propagate_source_numba if _backend == "numba" else _propagate_source_numpy
    return fn(np.ascontiguousarray(u, dtype=np.float64), float(alpha), float(beta), int(x0))


def hold_estimate(x, upd, xhat0):
    """Synchronize-or-hold estimate path for source path ``x`` and update flags ``upd``."""
    fn = _hold_estimate_numba if _backend == "numba" else _hold_estimate_numpy
    return fn(np.ascontiguousarray(x, dtype=np.int8), np.ascontiguousarray(upd, dtype=np.bool_), int(xhat0))
