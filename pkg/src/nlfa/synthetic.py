"""Synthetic problem generators for experiments and tests."""

from __future__ import annotations

import numpy as np

from .data import HdiMatrix
from .errors import DomainError


def low_rank_problem(
    num_rows: int,
    num_cols: int,
    rank: int,
    observed_fraction: float,
    seed,
    factor_scale: float = 1.0,
) -> tuple[HdiMatrix, HdiMatrix, np.ndarray, np.ndarray]:
    """Exactly low-rank recovery instance with a held-out entry set.

    Ground-truth factors are drawn uniform in (0, factor_scale), so every
    product entry is nonnegative. A seeded shuffle of all cells marks
    ``observed_fraction`` of them as known; the rest become the held-out
    matrix. Returns (observed, heldout, true_row_factors, true_col_factors).
    """
    if not 0 < observed_fraction < 1:
        raise DomainError("observed_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    A = factor_scale * rng.random((num_rows, rank))
    X = factor_scale * rng.random((num_cols, rank))
    Y = A @ X.T
    total = num_rows * num_cols
    n_obs = int(round(observed_fraction * total))
    n_obs = min(max(n_obs, 1), total - 1)
    perm = rng.permutation(total)
    shape = (num_rows, num_cols)

    def take(flat: np.ndarray) -> HdiMatrix:
        r, c = np.unravel_index(flat, shape)
        return HdiMatrix(num_rows, num_cols, r, c, Y[r, c])

    return take(perm[:n_obs]), take(perm[n_obs:]), A, X


def random_sparse(
    num_rows: int,
    num_cols: int,
    nnz: int,
    seed,
    value_range: tuple[float, float] = (0.0, 5.0),
) -> HdiMatrix:
    """Uniformly random sparse matrix with ``nnz`` distinct known cells."""
    total = num_rows * num_cols
    if nnz > total:
        raise DomainError(f"cannot place {nnz} distinct entries in {total} cells")
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=nnz, replace=False)
    r, c = np.unravel_index(flat, (num_rows, num_cols))
    lo, hi = value_range
    vals = lo + (hi - lo) * rng.random(nnz)
    return HdiMatrix(num_rows, num_cols, r, c, vals)
