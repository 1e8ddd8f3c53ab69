"""Estimation-accuracy metrics over a set of known entries.

Both metrics score the nonnegative output factors (A, X) against a target
entry set. Sums are accumulated in extended precision so entry order and
internal parallelism cannot nudge the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels
from .errors import DomainError

if TYPE_CHECKING:  # pragma: no cover
    from .admm import FactorState
    from .data import HdiMatrix


@dataclass(frozen=True)
class MetricResult:
    metric: str
    value: float
    count: int


def _predictions(state: "FactorState", target: "HdiMatrix", clip) -> np.ndarray:
    if target.nnz == 0:
        raise DomainError("target entry set is empty")
    if state.num_rows != target.num_rows or state.num_cols != target.num_cols:
        raise DomainError(
            f"state is {state.num_rows}x{state.num_cols}, "
            f"target is {target.num_rows}x{target.num_cols}"
        )
    yhat = _kernels.dot_entries(target.rows, target.cols, state.A, state.X)
    if clip is not None:
        np.clip(yhat, clip[0], clip[1], out=yhat)
    return yhat


def rmse(state: "FactorState", target: "HdiMatrix", clip=None) -> MetricResult:
    """Root mean squared error of the factor predictions on ``target``.

    ``clip``, when given as (lo, hi), clamps predictions to that range
    before scoring; by default predictions are used as-is.
    """
    yhat = _predictions(state, target, clip)
    total = float(np.sum((target.vals - yhat) ** 2, dtype=np.longdouble))
    return MetricResult("rmse", math.sqrt(total / target.nnz), target.nnz)


def mae(state: "FactorState", target: "HdiMatrix", clip=None) -> MetricResult:
    """Mean absolute error of the factor predictions on ``target``."""
    yhat = _predictions(state, target, clip)
    total = float(np.sum(np.abs(target.vals - yhat), dtype=np.longdouble))
    return MetricResult("mae", total / target.nnz, target.nnz)


def resolve(name: str):
    """Map a metric name to its function."""
    try:
        return {"rmse": rmse, "mae": mae}[name]
    except KeyError:
        raise DomainError(f"unknown metric {name!r}") from None
