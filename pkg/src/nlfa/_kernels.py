"""Numba inner loops for the column-wise solver.

Each kernel is compiled twice, serial and multi-threaded, and dispatched on
entry count: thread-pool launches cost more than the entire loop on small
problems. Parallel loops only ever range over rows, columns, or entries
whose writes are disjoint, and per-row accumulation order never changes, so
both variants produce bitwise-identical results.
"""

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

import numpy as np
from numba import njit, prange

# Below this many known entries the serial variants win.
PARALLEL_MIN_ENTRIES = 100_000


def _residual_impl(rows, cols, vals, P, Z):
    n = vals.shape[0]
    d = P.shape[1]
    out = np.empty(n, dtype=np.float64)
    for e in prange(n):
        u = rows[e]
        i = cols[e]
        acc = 0.0
        for j in range(d):
            acc += P[u, j] * Z[i, j]
        out[e] = vals[e] - acc
    return out


def _p_column_impl(row_ptr, cols, r, P, Z, A, H, lam, k):
    n = row_ptr.shape[0] - 1
    for u in prange(n):
        lo, hi = row_ptr[u], row_ptr[u + 1]
        deg = hi - lo
        if deg == 0:
            continue
        old = P[u, k]
        num = 0.0
        den = 0.0
        for e in range(lo, hi):
            zk = Z[cols[e], k]
            num += zk * (r[e] + old * zk)
            den += zk * zk
        new = (num + lam * deg * A[u, k] - H[u, k]) / (den + lam * deg)
        P[u, k] = new
        for e in range(lo, hi):
            r[e] += (old - new) * Z[cols[e], k]


def _z_column_impl(col_ptr, csc_perm, rows, r, P, Z, X, W, lam, k):
    n = col_ptr.shape[0] - 1
    for i in prange(n):
        lo, hi = col_ptr[i], col_ptr[i + 1]
        deg = hi - lo
        if deg == 0:
            continue
        old = Z[i, k]
        num = 0.0
        den = 0.0
        for t in range(lo, hi):
            e = csc_perm[t]
            pk = P[rows[e], k]
            num += pk * (r[e] + pk * old)
            den += pk * pk
        new = (num + lam * deg * X[i, k] - W[i, k]) / (den + lam * deg)
        Z[i, k] = new
        for t in range(lo, hi):
            e = csc_perm[t]
            r[e] += (old - new) * P[rows[e], k]


@njit(cache=True)
def row_aux_update(row_deg, P, A, H, lam, eta, k):
    """Fused nonnegative projection of A[:, k] and ascent on H[:, k].

    Value-identical to running the two steps separately: the multiplier
    step reads the freshly projected A. Skips rows without known entries.
    The loop is short (one pass over rows), so no parallel variant.
    """
    for u in range(row_deg.shape[0]):
        deg = row_deg[u]
        if deg == 0:
            continue
        a = P[u, k] + H[u, k] / (lam * deg)
        if a < 0.0:
            a = 0.0
        A[u, k] = a
        H[u, k] += eta * lam * deg * (P[u, k] - a)


@njit(cache=True)
def col_aux_update(col_deg, Z, X, W, lam, eta, k):
    """Mirror of :func:`row_aux_update` for X[:, k] and W[:, k]."""
    for i in range(col_deg.shape[0]):
        deg = col_deg[i]
        if deg == 0:
            continue
        x = Z[i, k] + W[i, k] / (lam * deg)
        if x < 0.0:
            x = 0.0
        X[i, k] = x
        W[i, k] += eta * lam * deg * (Z[i, k] - x)


def _dot_entries_impl(rows, cols, A, X):
    n = rows.shape[0]
    d = A.shape[1]
    out = np.empty(n, dtype=np.float64)
    for e in prange(n):
        u = rows[e]
        i = cols[e]
        acc = 0.0
        for j in range(d):
            acc += A[u, j] * X[i, j]
        out[e] = acc
    return out


_residual_serial = njit(cache=True)(_residual_impl)
_residual_parallel = njit(cache=True, parallel=True)(_residual_impl)
_p_column_serial = njit(cache=True)(_p_column_impl)
_p_column_parallel = njit(cache=True, parallel=True)(_p_column_impl)
_z_column_serial = njit(cache=True)(_z_column_impl)
_z_column_parallel = njit(cache=True, parallel=True)(_z_column_impl)
_dot_entries_serial = njit(cache=True)(_dot_entries_impl)
_dot_entries_parallel = njit(cache=True, parallel=True)(_dot_entries_impl)


def residual(rows, cols, vals, P, Z):
    """r[e] = vals[e] - sum_j P[rows[e], j] * Z[cols[e], j]."""
    fn = _residual_parallel if vals.shape[0] >= PARALLEL_MIN_ENTRIES else _residual_serial
    return fn(rows, cols, vals, P, Z)


def p_column_update(row_ptr, cols, r, P, Z, A, H, lam, k):
    """Closed-form refresh of P[:, k]; keeps the residual ``r`` consistent.

    ``r`` must hold the full residuals y - P Z^T on entry. Rows with no
    known entries are skipped.
    """
    fn = _p_column_parallel if cols.shape[0] >= PARALLEL_MIN_ENTRIES else _p_column_serial
    fn(row_ptr, cols, r, P, Z, A, H, lam, k)


def z_column_update(col_ptr, csc_perm, rows, r, P, Z, X, W, lam, k):
    """Mirror of :func:`p_column_update` over the column adjacency.

    ``csc_perm`` maps (col, row)-ordered positions back to canonical entry
    positions so the shared residual array can be read and updated.
    """
    fn = _z_column_parallel if rows.shape[0] >= PARALLEL_MIN_ENTRIES else _z_column_serial
    fn(col_ptr, csc_perm, rows, r, P, Z, X, W, lam, k)


def dot_entries(rows, cols, A, X):
    """Predicted values sum_k A[rows[e], k] * X[cols[e], k] per entry."""
    fn = _dot_entries_parallel if rows.shape[0] >= PARALLEL_MIN_ENTRIES else _dot_entries_serial
    return fn(rows, cols, A, X)
