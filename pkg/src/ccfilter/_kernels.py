"""Batched dense complex LU solve with partial pivoting.

Two interchangeable implementations of ``lu_solve_batch``:

* a numba ``@njit(parallel=True)`` kernel, one frequency per ``prange`` lane;
* a pure-numpy path that vectorizes each elimination step across the batch.

``CCFILTER_BACKEND=numpy`` forces the numpy path; otherwise numba is used
when importable. ``CCFILTER_THREADS`` caps the numba thread count (0 = auto).

Both return ``(x, bad_row)`` where ``bad_row[k]`` is -1 on success or the
elimination column whose pivot fell below ``pivot_rtol * max|A[k]|``.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def lu_solve_batch_numpy(A, b, pivot_rtol=1e-13):
    A = np.array(A, dtype=np.complex128, copy=True)
    x = np.array(b, dtype=np.complex128, copy=True)
    nb, n, _ = A.shape
    bad = np.full(nb, -1, dtype=np.int64)
    lanes = np.arange(nb)
    tol = pivot_rtol * np.abs(A).reshape(nb, -1).max(axis=1, initial=0.0)

    for k in range(n):
        p = k + np.argmax(np.abs(A[:, k:, k]), axis=1)
        piv_mag = np.abs(A[lanes, p, k])
        newly_bad = (piv_mag <= tol) & (bad < 0)
        bad[newly_bad] = k
        rows_k = A[lanes, k, :].copy()
        A[lanes, k, :] = A[lanes, p, :]
        A[lanes, p, :] = rows_k
        xk = x[lanes, k].copy()
        x[lanes, k] = x[lanes, p]
        x[lanes, p] = xk
        piv = A[:, k, k]
        piv = np.where(bad >= 0, 1.0, piv)
        f = A[:, k + 1:, k] / piv[:, None]
        A[:, k + 1:, k:] -= f[:, :, None] * A[:, None, k, k:]
        x[:, k + 1:] -= f * x[:, k, None]

    for k in range(n - 1, -1, -1):
        acc = x[:, k] - np.einsum("bj,bj->b", A[:, k, k + 1:], x[:, k + 1:])
        piv = np.where(bad >= 0, 1.0, A[:, k, k])
        x[:, k] = acc / piv
    x[bad >= 0] = np.nan
    return x, bad


if HAVE_NUMBA:

    @njit(cache=True)
    def _lu_solve_one(A, x, pivot_rtol):
        n = A.shape[0]
        amax = 0.0
        for i in range(n):
            for j in range(n):
                v = abs(A[i, j])
                if v > amax:
                    amax = v
        tol = pivot_rtol * amax
        for k in range(n):
            p = k
            best = abs(A[k, k])
            for i in range(k + 1, n):
                v = abs(A[i, k])
                if v > best:
                    best = v
                    p = i
            if best <= tol:
                return k
            if p != k:
                for j in range(n):
                    t = A[k, j]
                    A[k, j] = A[p, j]
                    A[p, j] = t
                t = x[k]
                x[k] = x[p]
                x[p] = t
            piv = A[k, k]
            for i in range(k + 1, n):
                f = A[i, k] / piv
                if f != 0:
                    for j in range(k, n):
                        A[i, j] -= f * A[k, j]
                    x[i] -= f * x[k]
        for k in range(n - 1, -1, -1):
            acc = x[k]
            for j in range(k + 1, n):
                acc -= A[k, j] * x[j]
            x[k] = acc / A[k, k]
        return -1

    @njit(parallel=True, cache=True)
    def _lu_solve_batch_numba(A, b, pivot_rtol):
        nb = A.shape[0]
        Aw = A.copy()
        x = b.copy()
        bad = np.empty(nb, dtype=np.int64)
        for k in prange(nb):
            bad[k] = _lu_solve_one(Aw[k], x[k], pivot_rtol)
            if bad[k] >= 0:
                x[k, :] = np.nan
        return x, bad

    def lu_solve_batch_numba(A, b, pivot_rtol=1e-13):
        A = np.ascontiguousarray(A, dtype=np.complex128)
        b = np.ascontiguousarray(b, dtype=np.complex128)
        return _lu_solve_batch_numba(A, b, float(pivot_rtol))


def backend() -> str:
    want = os.environ.get("CCFILTER_BACKEND", "").strip().lower()
    if want == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


def _apply_thread_cap():
    raw = os.environ.get("CCFILTER_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(limit if n <= 0 else min(n, limit))


def lu_solve_batch(A, b, pivot_rtol=1e-13):
    """Solve ``A[k] @ x[k] = b[k]`` for every k with the selected backend."""
    if backend() == "numba":
        with warnings.catch_warnings():
            # Numba falls back to another threading layer on its own.
            warnings.filterwarnings("ignore", message="The TBB threading layer")
            _apply_thread_cap()
            return lu_solve_batch_numba(A, b, pivot_rtol)
    return lu_solve_batch_numpy(A, b, pivot_rtol)
