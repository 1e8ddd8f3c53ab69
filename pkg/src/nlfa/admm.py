"""Column-wise alternating-direction solver for nonnegative factor recovery.

The model approximates the known entries of a sparse matrix Y by A X^T with
A, X >= 0. Two unconstrained fitting factors P (rows) and Z (columns) carry
the least-squares work; A and X mirror them under a nonnegativity
projection; multiplier matrices H and W enforce P = A and Z = X through an
augmented penalty whose weight on each row/column scales with its number of
known entries. One training iteration sweeps the latent dimensions k in
order and, per dimension, runs three strictly sequential steps:

  1. closed-form refresh of P[:, k] then Z[:, k] (Z sees the new P column),
  2. nonnegative projection of A[:, k] then X[:, k],
  3. multiplier ascent on H[:, k] then W[:, k].

Rows and columns without any known training entry are skipped by every
step (their penalty weight would be zero) and keep their initial values.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, metrics
from .data import HdiMatrix
from .errors import ConfigError, DomainError, NumericError


@dataclass(frozen=True)
class HyperParams:
    """Solver hyper-parameters: penalty coefficient and multiplier step."""

    lam: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ConfigError(f"lambda must be a positive real, got {self.lam}")
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ConfigError(f"eta must be a positive real, got {self.eta}")


@dataclass(frozen=True)
class TerminationPolicy:
    """Stopping rules for the outer training loop.

    Training stops when the difference between consecutive training errors
    falls below ``tol``, when the training error rises ``patience`` times in
    a row, or when ``max_iters`` iterations have run.
    """

    tol: float = 1e-5
    patience: int = 5
    max_iters: int = 1000

    def __post_init__(self):
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")


class TerminationReason(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGING = "diverging"
    MAX_ITERS = "max-iters"


@dataclass
class IterationRecord:
    """Metrics snapshot taken after one training iteration."""

    train_rmse: float
    validation_m: float | None
    lam: float
    eta: float
    elapsed_ms: float


@dataclass
class TrainReport:
    """Per-iteration history plus the reason training stopped."""

    records: list[IterationRecord] = field(default_factory=list)
    reason: TerminationReason | None = None

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclass
class FactorState:
    """The six parameter matrices of one training session.

    P, A, H are |U| x d; Z, X, W are |I| x d. A and X stay element-wise
    nonnegative after every completed iteration. The state has a single
    writer during training.
    """

    P: np.ndarray
    Z: np.ndarray
    A: np.ndarray
    X: np.ndarray
    H: np.ndarray
    W: np.ndarray

    @property
    def num_rows(self) -> int:
        return self.P.shape[0]

    @property
    def num_cols(self) -> int:
        return self.Z.shape[0]

    @property
    def rank(self) -> int:
        return self.P.shape[1]

    def copy(self) -> "FactorState":
        return FactorState(*(m.copy() for m in (self.P, self.Z, self.A, self.X, self.H, self.W)))


def init_state(num_rows: int, num_cols: int, rank: int, seed) -> FactorState:
    """Seeded initial state: factors uniform in (0, 0.05], multipliers zero.

    Small positive factor values keep early residuals bounded and satisfy
    the nonnegativity constraints from the start. Draw order is fixed
    (P, Z, A, X) so a seed pins the state exactly.
    """
    if num_rows < 1 or num_cols < 1 or rank < 1:
        raise DomainError("num_rows, num_cols and rank must all be >= 1")
    rng = np.random.default_rng(seed)

    def draw(n: int) -> np.ndarray:
        # 1 - random() lies in (0, 1], keeping values strictly positive.
        return 0.05 * (1.0 - rng.random((n, rank)))

    return FactorState(
        P=draw(num_rows),
        Z=draw(num_cols),
        A=draw(num_rows),
        X=draw(num_cols),
        H=np.zeros((num_rows, rank)),
        W=np.zeros((num_cols, rank)),
    )


def _require_shapes(state: FactorState, train: HdiMatrix) -> None:
    if state.num_rows != train.num_rows or state.num_cols != train.num_cols:
        raise DomainError(
            f"state is {state.num_rows}x{state.num_cols}, "
            f"matrix is {train.num_rows}x{train.num_cols}"
        )


def _require_column(state: FactorState, k: int) -> None:
    if not 0 <= k < state.rank:
        raise DomainError(f"column index {k} out of range for rank {state.rank}")


def _check_finite_column(M: np.ndarray, k: int, name: str) -> None:
    col = M[:, k]
    if not np.isfinite(col).all():
        u = int(np.flatnonzero(~np.isfinite(col))[0])
        raise NumericError(f"non-finite value in {name}[{u},{k}]")


def update_p_column(
    state: FactorState,
    train: HdiMatrix,
    hp: HyperParams,
    k: int,
    residual: np.ndarray | None = None,
) -> np.ndarray:
    """Replace P[:, k] with its closed-form minimizer, other parameters fixed.

    For each row u with known entries, the new value balances the
    per-entry fit against the penalty pull toward A[u, k] - H[u, k]
    contribution, both weighted by the row's entry count. Rows without
    training entries are untouched. When ``residual`` (the cached
    y - P Z^T over known entries) is supplied it is updated in place;
    otherwise it is computed fresh from the current factors.
    """
    _require_column(state, k)
    _require_shapes(state, train)
    if residual is None:
        residual = _kernels.residual(train.rows, train.cols, train.vals, state.P, state.Z)
    _kernels.p_column_update(
        train.row_ptr, train.cols, residual, state.P, state.Z, state.A, state.H, hp.lam, k
    )
    _check_finite_column(state.P, k, "p")
    return state.P[:, k]


def update_z_column(
    state: FactorState,
    train: HdiMatrix,
    hp: HyperParams,
    k: int,
    residual: np.ndarray | None = None,
) -> np.ndarray:
    """Mirror of :func:`update_p_column` over columns (Z, X, W roles)."""
    _require_column(state, k)
    _require_shapes(state, train)
    if residual is None:
        residual = _kernels.residual(train.rows, train.cols, train.vals, state.P, state.Z)
    _kernels.z_column_update(
        train.col_ptr, train.csc_perm, train.rows, residual, state.P, state.Z, state.X, state.W, hp.lam, k
    )
    _check_finite_column(state.Z, k, "z")
    return state.Z[:, k]


def project_a_column(state: FactorState, train: HdiMatrix, hp: HyperParams, k: int) -> np.ndarray:
    """A[:, k] = max(0, P[:, k] + H[:, k] / (lam * row degree)), per active row."""
    _require_column(state, k)
    _require_shapes(state, train)
    m = train.row_deg > 0
    deg = train.row_deg[m]
    state.A[m, k] = np.maximum(0.0, state.P[m, k] + state.H[m, k] / (hp.lam * deg))
    return state.A[:, k]


def project_x_column(state: FactorState, train: HdiMatrix, hp: HyperParams, k: int) -> np.ndarray:
    """X[:, k] = max(0, Z[:, k] + W[:, k] / (lam * col degree)), per active column."""
    _require_column(state, k)
    _require_shapes(state, train)
    m = train.col_deg > 0
    deg = train.col_deg[m]
    state.X[m, k] = np.maximum(0.0, state.Z[m, k] + state.W[m, k] / (hp.lam * deg))
    return state.X[:, k]


def update_h_column(state: FactorState, train: HdiMatrix, hp: HyperParams, k: int) -> np.ndarray:
    """Multiplier ascent H[:, k] += eta * lam * row degree * (P[:, k] - A[:, k])."""
    _require_column(state, k)
    _require_shapes(state, train)
    m = train.row_deg > 0
    deg = train.row_deg[m]
    state.H[m, k] += hp.eta * hp.lam * deg * (state.P[m, k] - state.A[m, k])
    return state.H[:, k]


def update_w_column(state: FactorState, train: HdiMatrix, hp: HyperParams, k: int) -> np.ndarray:
    """Multiplier ascent W[:, k] += eta * lam * col degree * (Z[:, k] - X[:, k])."""
    _require_column(state, k)
    _require_shapes(state, train)
    m = train.col_deg > 0
    deg = train.col_deg[m]
    state.W[m, k] += hp.eta * hp.lam * deg * (state.Z[m, k] - state.X[m, k])
    return state.W[:, k]


def train_iteration(state: FactorState, train: HdiMatrix, hp: HyperParams) -> FactorState:
    """Run one full sweep over the latent dimensions, mutating ``state``.

    The residual cache is rebuilt from scratch at the start of every
    iteration (bounding incremental drift) and then maintained in place by
    the column updates, so each inner sum over "other dimensions" costs
    O(known entries) instead of O(known entries * rank).
    """
    _require_shapes(state, train)
    residual = _kernels.residual(train.rows, train.cols, train.vals, state.P, state.Z)
    for k in range(state.rank):
        update_p_column(state, train, hp, k, residual=residual)
        update_z_column(state, train, hp, k, residual=residual)
        # Fused projection + multiplier steps; value-identical to calling
        # project_a/x_column then update_h/w_column.
        _kernels.row_aux_update(train.row_deg, state.P, state.A, state.H, hp.lam, hp.eta, k)
        _kernels.col_aux_update(train.col_deg, state.Z, state.X, state.W, hp.lam, hp.eta, k)
    for name in ("A", "X", "H", "W"):
        M = getattr(state, name)
        if not np.isfinite(M).all():
            u, k = np.argwhere(~np.isfinite(M))[0]
            raise NumericError(f"non-finite value in {name.lower()}[{u},{k}]")
    return state


def predict(state: FactorState, row: int, col: int) -> float:
    """Estimate one cell as the dot product of its nonnegative factors."""
    if not 0 <= row < state.num_rows:
        raise DomainError(f"row index {row} out of range")
    if not 0 <= col < state.num_cols:
        raise DomainError(f"column index {col} out of range")
    return float(np.dot(state.A[row], state.X[col]))


def predict_entries(state: FactorState, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Vectorized :func:`predict` over parallel index arrays."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= state.num_rows):
        raise DomainError("row index out of range")
    if cols.size and (cols.min() < 0 or cols.max() >= state.num_cols):
        raise DomainError("column index out of range")
    return _kernels.dot_entries(rows, cols, state.A, state.X)


def check_termination(history, policy: TerminationPolicy) -> TerminationReason | None:
    """Decide whether training should stop given the training-error history.

    Returns ``None`` to continue. Convergence (a small consecutive
    difference) is checked before divergence, which is checked before the
    iteration cap.
    """
    n = len(history)
    if n == 0:
        raise DomainError("termination check needs a non-empty error history")
    if n >= 2 and abs(history[-1] - history[-2]) < policy.tol:
        return TerminationReason.CONVERGED
    if n >= policy.patience + 1:
        if all(history[-j] > history[-j - 1] for j in range(1, policy.patience + 1)):
            return TerminationReason.DIVERGING
    if n >= policy.max_iters:
        return TerminationReason.MAX_ITERS
    return None


def train_fixed(
    train: HdiMatrix,
    state: FactorState,
    hp: HyperParams,
    policy: TerminationPolicy,
    validation: HdiMatrix | None = None,
    metric: str = "rmse",
) -> tuple[FactorState, TrainReport]:
    """Train with fixed hyper-parameters until the policy stops the loop.

    ``validation``, when given, is scored after every iteration with the
    named metric for monitoring only; it never influences the updates.
    """
    metric_fn = metrics.resolve(metric)
    report = TrainReport()
    history: list[float] = []
    while True:
        t0 = time.perf_counter()
        try:
            train_iteration(state, train, hp)
        except NumericError as exc:
            raise NumericError(f"iteration {len(history) + 1}: {exc}") from exc
        train_rmse = metrics.rmse(state, train).value
        validation_m = None
        if validation is not None and validation.nnz:
            validation_m = metric_fn(state, validation).value
        history.append(train_rmse)
        report.records.append(
            IterationRecord(
                train_rmse=train_rmse,
                validation_m=validation_m,
                lam=hp.lam,
                eta=hp.eta,
                elapsed_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
        reason = check_termination(history, policy)
        if reason is not None:
            report.reason = reason
            return state, report
