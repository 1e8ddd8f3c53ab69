"""Sparse rating data: dual-indexed matrix storage, file parsing, fold splits.

The known entries of a partially observed matrix are stored once, sorted by
(row, col), together with two adjacency indexes: a CSR-style row pointer for
per-row iteration and a permutation into (col, row) order for per-column
iteration. Values never get densified; everything downstream works off the
known-entry arrays only.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import DomainError, ParseError

# Accepted field separators for rating files.
SEPARATORS = ("::", "\t", ",", " ")


class Entry(NamedTuple):
    """One known cell of a sparse matrix."""

    row: int
    col: int
    value: float


class HdiMatrix:
    """Immutable sparse nonnegative matrix with row and column adjacency.

    ``rows``, ``cols``, ``vals`` hold the known entries sorted by
    (row, col). ``row_ptr[u]:row_ptr[u+1]`` slices the entries of row ``u``;
    ``csc_perm`` permutes entry positions into (col, row) order, with
    ``col_ptr`` delimiting each column. All arrays are read-only, so an
    instance can be shared freely across threads.

    Rows and columns with no known entries are legal; ``num_rows`` and
    ``num_cols`` fix the nominal shape independently of the entry set.
    ``row_labels``/``col_labels`` optionally retain the original identifiers
    that were re-indexed to produce dense 0-based indices.
    """

    __slots__ = (
        "num_rows",
        "num_cols",
        "rows",
        "cols",
        "vals",
        "row_ptr",
        "col_ptr",
        "csc_perm",
        "row_deg",
        "col_deg",
        "row_labels",
        "col_labels",
    )

    def __init__(
        self,
        num_rows: int,
        num_cols: int,
        rows: np.ndarray,
        cols: np.ndarray,
        vals: np.ndarray,
        row_labels: tuple[str, ...] | None = None,
        col_labels: tuple[str, ...] | None = None,
    ):
        if num_rows < 0 or num_cols < 0:
            raise DomainError("matrix dimensions must be nonnegative")
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise DomainError("entry arrays must be 1-D and of equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= num_rows:
                raise DomainError("row index out of range")
            if cols.min() < 0 or cols.max() >= num_cols:
                raise DomainError("column index out of range")
            if vals.min() < 0:
                raise DomainError("entry values must be nonnegative")
            if not np.isfinite(vals).all():
                raise DomainError("entry values must be finite")

        order = np.lexsort((cols, rows))
        rows = rows[order]
        cols = cols[order]
        vals = vals[order]
        if rows.size > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                j = int(np.argmax(dup))
                raise DomainError(f"duplicate entry at ({rows[j]}, {cols[j]})")

        self.num_rows = int(num_rows)
        self.num_cols = int(num_cols)
        self.rows = rows
        self.cols = cols
        self.vals = vals
        self.row_ptr = _pointer(rows, num_rows)
        self.csc_perm = np.lexsort((rows, cols))
        self.col_ptr = _pointer(cols[self.csc_perm], num_cols)
        self.row_deg = np.diff(self.row_ptr)
        self.col_deg = np.diff(self.col_ptr)
        self.row_labels = tuple(row_labels) if row_labels is not None else None
        self.col_labels = tuple(col_labels) if col_labels is not None else None
        for name in ("rows", "cols", "vals", "row_ptr", "col_ptr", "csc_perm", "row_deg", "col_deg"):
            getattr(self, name).flags.writeable = False

    @classmethod
    def from_entries(
        cls,
        num_rows: int,
        num_cols: int,
        entries: Iterable[Entry | tuple[int, int, float]],
        **kwargs,
    ) -> "HdiMatrix":
        entries = list(entries)
        rows = np.fromiter((e[0] for e in entries), dtype=np.int64, count=len(entries))
        cols = np.fromiter((e[1] for e in entries), dtype=np.int64, count=len(entries))
        vals = np.fromiter((e[2] for e in entries), dtype=np.float64, count=len(entries))
        return cls(num_rows, num_cols, rows, cols, vals, **kwargs)

    @property
    def nnz(self) -> int:
        """Number of known entries."""
        return self.vals.size

    def __len__(self) -> int:
        return self.nnz

    def entries(self) -> Iterator[Entry]:
        """Iterate the known entries in (row, col) order."""
        for r, c, v in zip(self.rows, self.cols, self.vals):
            yield Entry(int(r), int(c), float(v))

    def row(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and values of the known entries in row ``u``."""
        lo, hi = self.row_ptr[u], self.row_ptr[u + 1]
        return self.cols[lo:hi], self.vals[lo:hi]

    def column(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Row indices and values of the known entries in column ``i``."""
        lo, hi = self.col_ptr[i], self.col_ptr[i + 1]
        sel = self.csc_perm[lo:hi]
        return self.rows[sel], self.vals[sel]

    def density(self) -> float:
        """Known-entry count over total cell count."""
        total = self.num_rows * self.num_cols
        if total == 0:
            raise DomainError("density of a zero-dimension matrix is undefined")
        return self.nnz / total

    def transpose(self) -> "HdiMatrix":
        return HdiMatrix(
            self.num_cols,
            self.num_rows,
            self.cols,
            self.rows,
            self.vals,
            row_labels=self.col_labels,
            col_labels=self.row_labels,
        )

    def __repr__(self) -> str:
        return f"HdiMatrix({self.num_rows}x{self.num_cols}, nnz={self.nnz})"


def _pointer(sorted_idx: np.ndarray, n: int) -> np.ndarray:
    counts = np.bincount(sorted_idx, minlength=n) if sorted_idx.size else np.zeros(n, dtype=np.int64)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train / validation / test views of one entry set."""

    train: HdiMatrix
    validation: HdiMatrix
    test: HdiMatrix

    def __post_init__(self):
        dims = {(m.num_rows, m.num_cols) for m in (self.train, self.validation, self.test)}
        if len(dims) != 1:
            raise DomainError("split members must share matrix dimensions")


def density(matrix: HdiMatrix) -> float:
    """Known-entry count of ``matrix`` over its total cell count."""
    return matrix.density()


def parse_ratings(source, sep: str = "::") -> HdiMatrix:
    """Parse a line-oriented rating stream into a sparse matrix.

    ``source`` may be a path or any iterable of text lines. Each non-empty
    line must carry at least three ``sep``-separated fields: user id,
    item id, rating; extra fields (timestamps etc.) are ignored. Ids are
    arbitrary tokens and get re-indexed to dense 0-based indices in order
    of first appearance; the original ids are retained as row/col labels.
    When the same (user, item) pair occurs more than once, the last
    occurrence wins.
    """
    if sep not in SEPARATORS:
        raise DomainError(f"unsupported separator {sep!r}")
    if isinstance(source, (str, os.PathLike)):
        with io.open(source, "r", encoding="utf-8") as handle:
            return parse_ratings(handle, sep)

    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    cells: dict[tuple[int, int], float] = {}
    for line_number, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(sep)
        if len(fields) < 3:
            raise ParseError(f"expected at least 3 fields, got {len(fields)}", line_number)
        user, item, raw = fields[0], fields[1], fields[2]
        try:
            rating = float(raw)
        except ValueError:
            raise ParseError(f"rating field {raw!r} is not a number", line_number) from None
        if not np.isfinite(rating):
            raise ParseError(f"rating field {raw!r} is not finite", line_number)
        if rating < 0:
            raise DomainError(f"line {line_number}: negative rating {rating}")
        u = user_index.setdefault(user, len(user_index))
        i = item_index.setdefault(item, len(item_index))
        cells[(u, i)] = rating

    if not cells:
        raise DomainError("rating stream contains no entries")
    rows = np.fromiter((k[0] for k in cells), dtype=np.int64, count=len(cells))
    cols = np.fromiter((k[1] for k in cells), dtype=np.int64, count=len(cells))
    vals = np.fromiter(cells.values(), dtype=np.float64, count=len(cells))
    return HdiMatrix(
        len(user_index),
        len(item_index),
        rows,
        cols,
        vals,
        row_labels=tuple(user_index),
        col_labels=tuple(item_index),
    )


def ten_fold_splits(matrix: HdiMatrix, seed) -> list[DatasetSplit]:
    """Partition the known entries into ten folds of train/validation/test.

    One seeded shuffle splits the entry set into ten near-equal subsets
    (sizes differ by at most one). Fold ``f`` takes subsets
    ``f..f+6 (mod 10)`` for training, ``f+7`` for validation and the
    remaining two for testing, so the ten folds rotate over a single fixed
    partition. Identical seeds give identical splits.
    """
    if matrix.nnz < 10:
        raise DomainError(f"need at least 10 entries to build ten folds, got {matrix.nnz}")
    rng = np.random.default_rng(seed)
    subsets = np.array_split(rng.permutation(matrix.nnz), 10)

    def take(indices: np.ndarray) -> HdiMatrix:
        return HdiMatrix(
            matrix.num_rows,
            matrix.num_cols,
            matrix.rows[indices],
            matrix.cols[indices],
            matrix.vals[indices],
            row_labels=matrix.row_labels,
            col_labels=matrix.col_labels,
        )

    splits = []
    for f in range(10):
        train_idx = np.concatenate([subsets[(f + j) % 10] for j in range(7)])
        val_idx = subsets[(f + 7) % 10]
        test_idx = np.concatenate([subsets[(f + 8) % 10], subsets[(f + 9) % 10]])
        splits.append(DatasetSplit(take(train_idx), take(val_idx), take(test_idx)))
    return splits
