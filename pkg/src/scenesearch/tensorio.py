"""Bit-exact binary tensor format and line-delimited JSON helpers.

The tensor layout is fixed little-endian regardless of host:

    magic  8 bytes  b"SCNTNSR1"
    rank   u32
    dims   rank x u64
    data   prod(dims) x f32, row-major

In memory a tensor is simply a C-contiguous ``numpy.ndarray`` of float32.
Writing refuses non-finite values; reading validates magic, rank, dims,
length consistency and finiteness, reporting the byte offset of the first
violation. Round-trip is bit-exact: ``read_tensor(write_tensor(t)) == t``.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import TensorFormatError

TENSOR_MAGIC = b"SCNTNSR1"
MAX_RANK = 8

_HEADER = np.dtype("<u4")
_DIM = np.dtype("<u8")
_VALUE = np.dtype("<f4")


def as_tensor(values, dims=None) -> np.ndarray:
    """Coerce to the in-memory tensor representation (C-contiguous f32)."""
    arr = np.asarray(values, dtype=np.float32)
    if dims is not None:
        arr = arr.reshape(dims)
    return np.ascontiguousarray(arr)


def write_tensor(tensor: np.ndarray) -> bytes:
    """Serialize a tensor. Equal tensors produce identical bytes."""
    arr = as_tensor(tensor)
    if arr.ndim < 1 or arr.ndim > MAX_RANK:
        raise TensorFormatError(
            "bad-rank", f"rank must be in 1..{MAX_RANK}, got {arr.ndim}", 8
        )
    if any(d < 1 for d in arr.shape):
        raise TensorFormatError("bad-dims", f"all dims must be >= 1, got {arr.shape}", 12)
    if not np.isfinite(arr).all():
        flat = int(np.argmax(~np.isfinite(arr.reshape(-1))))
        offset = 8 + 4 + 8 * arr.ndim + 4 * flat
        raise TensorFormatError(
            "non-finite", f"refusing to write non-finite value at flat index {flat}", offset
        )
    parts = [
        TENSOR_MAGIC,
        np.asarray([arr.ndim], dtype=_HEADER).tobytes(),
        np.asarray(arr.shape, dtype=_DIM).tobytes(),
        arr.astype(_VALUE, copy=False).tobytes(order="C"),
    ]
    return b"".join(parts)


def read_tensor(data: bytes) -> np.ndarray:
    """Inverse of :func:`write_tensor`, with full validation."""
    if len(data) < 8:
        raise TensorFormatError("truncated", "payload shorter than magic", len(data))
    if data[:8] != TENSOR_MAGIC:
        raise TensorFormatError("bad-magic", f"expected {TENSOR_MAGIC!r}, got {data[:8]!r}", 0)
    if len(data) < 12:
        raise TensorFormatError("truncated", "payload ends inside rank field", len(data))
    rank = int(np.frombuffer(data, dtype=_HEADER, count=1, offset=8)[0])
    if rank < 1 or rank > MAX_RANK:
        raise TensorFormatError("bad-rank", f"rank must be in 1..{MAX_RANK}, got {rank}", 8)
    dims_end = 12 + 8 * rank
    if len(data) < dims_end:
        raise TensorFormatError("truncated", "payload ends inside dims field", len(data))
    dims = [int(d) for d in np.frombuffer(data, dtype=_DIM, count=rank, offset=12)]
    for i, d in enumerate(dims):
        if d < 1:
            raise TensorFormatError("bad-dims", f"dim {i} must be >= 1, got {d}", 12 + 8 * i)
    count = 1
    for d in dims:
        count *= d
    expected = dims_end + 4 * count
    if len(data) < expected:
        raise TensorFormatError(
            "truncated", f"expected {expected} bytes, got {len(data)}", len(data)
        )
    if len(data) > expected:
        raise TensorFormatError(
            "trailing-bytes", f"{len(data) - expected} bytes past end of data", expected
        )
    values = np.frombuffer(data, dtype=_VALUE, count=count, offset=dims_end)
    if not np.isfinite(values).all():
        flat = int(np.argmax(~np.isfinite(values)))
        raise TensorFormatError(
            "non-finite", f"non-finite value at flat index {flat}", dims_end + 4 * flat
        )
    arr = values.astype(np.float32).reshape(dims)
    return np.ascontiguousarray(arr)


def write_tensor_file(path: str | Path, tensor: np.ndarray) -> None:
    Path(path).write_bytes(write_tensor(tensor))


def read_tensor_file(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise TensorFormatError("missing-file", f"cannot read {path}: {exc}", 0) from exc
    try:
        return read_tensor(data)
    except TensorFormatError as exc:
        raise TensorFormatError(exc.code, f"{path}: {exc.message}", exc.offset) from None


def tensor_to_base64(tensor: np.ndarray) -> str:
    return base64.b64encode(write_tensor(tensor)).decode("ascii")


def tensor_from_base64(payload: str) -> np.ndarray:
    return read_tensor(base64.b64decode(payload.encode("ascii")))


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    """One JSON object per line, UTF-8, keys sorted for determinism."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad JSON line: {exc}") from None
            if not isinstance(row, dict):
                raise ValueError(f"{path}:{lineno}: expected a JSON object")
            rows.append(row)
    return rows
