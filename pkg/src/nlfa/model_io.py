"""Binary model artifacts with exact round-tripping.

Layout: an 8-byte magic tag, a little-endian uint32 format version, a
little-endian uint64 length-prefixed UTF-8 JSON metadata blob (dimensions,
id-remapping tables, run provenance), then the six factor matrices as
row-major little-endian float64 in the fixed order P, Z, A, X, H, W.
Matrices are written bit-for-bit, so save -> load -> predict reproduces
values exactly.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .admm import FactorState
from .errors import ConfigError

MAGIC = b"NLFACTOR"
VERSION = 1

_MATRIX_ORDER = ("P", "Z", "A", "X", "H", "W")


def save_model(path, state: FactorState, meta: dict) -> None:
    """Write ``state`` plus metadata to ``path``.

    ``meta`` must be JSON-serializable; dimensions and rank are filled in
    automatically and verified on load.
    """
    meta = dict(meta)
    meta["num_rows"] = state.num_rows
    meta["num_cols"] = state.num_cols
    meta["rank"] = state.rank
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for name in _MATRIX_ORDER:
            matrix = np.ascontiguousarray(getattr(state, name), dtype="<f8")
            fh.write(matrix.tobytes(order="C"))


def load_model(path) -> tuple[FactorState, dict]:
    """Read an artifact written by :func:`save_model`."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ConfigError(f"{path}: not a model artifact (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ConfigError(f"{path}: unsupported artifact version {version}")
        (meta_len,) = struct.unpack("<Q", fh.read(8))
        meta = json.loads(fh.read(meta_len).decode("utf-8"))
        num_rows, num_cols, rank = meta["num_rows"], meta["num_cols"], meta["rank"]
        shapes = {
            "P": (num_rows, rank),
            "Z": (num_cols, rank),
            "A": (num_rows, rank),
            "X": (num_cols, rank),
            "H": (num_rows, rank),
            "W": (num_cols, rank),
        }
        matrices = {}
        for name in _MATRIX_ORDER:
            shape = shapes[name]
            raw = fh.read(shape[0] * shape[1] * 8)
            if len(raw) != shape[0] * shape[1] * 8:
                raise ConfigError(f"{path}: truncated artifact")
            matrices[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return FactorState(**matrices), meta
