"""Reader for IDX files (the format MNIST ships in), gzip-transparent.

Layout: two zero bytes, one dtype code, one byte giving the number of
dimensions; then that many big-endian uint32 sizes; then the raw data in
row-major order.  Only the uint8 dtype (code 0x08) is supported, which is
what the image and label files use.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .errors import CorruptionError, FormatError

_DTYPE_U8 = 0x08


def _read_bytes(path: Union[str, Path]) -> bytes:
    p = Path(path)
    if p.suffix == ".gz":
        with gzip.open(p, "rb") as fh:
            return fh.read()
    return p.read_bytes()


def load_idx(path: Union[str, Path]) -> np.ndarray:
    """The IDX file at ``path`` as a uint8 array of its declared shape."""
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise CorruptionError(f"{path}: truncated IDX header ({len(raw)} bytes)")
    zeros, dtype, ndim = raw[:2], raw[2], raw[3]
    if zeros != b"\x00\x00":
        raise FormatError(f"{path}: not an IDX file (leading bytes {zeros!r})")
    if dtype != _DTYPE_U8:
        raise FormatError(f"{path}: unsupported IDX dtype code 0x{dtype:02x}")
    if ndim < 1:
        raise FormatError(f"{path}: IDX declares zero dimensions")
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise CorruptionError(f"{path}: truncated IDX dimension list")
    shape = struct.unpack(f">{ndim}I", raw[4:header_len])
    count = int(np.prod(shape, dtype=np.int64))
    data = raw[header_len:]
    if len(data) < count:
        raise CorruptionError(
            f"{path}: IDX payload holds {len(data)} bytes, shape {shape} needs {count}"
        )
    if len(data) > count:
        raise CorruptionError(f"{path}: {len(data) - count} trailing bytes after IDX payload")
    return np.frombuffer(data, dtype=np.uint8).reshape(shape)


def load_images(path: Union[str, Path]) -> np.ndarray:
    """(n, rows*cols) float32 array in [0, 1] from an IDX image file."""
    arr = load_idx(path)
    if arr.ndim != 3:
        raise FormatError(f"{path}: image IDX must be 3-dimensional, got shape {arr.shape}")
    n = arr.shape[0]
    return (arr.reshape(n, -1).astype(np.float32)) / 255.0


def load_labels(path: Union[str, Path]) -> np.ndarray:
    """(n,) int64 label vector from an IDX label file."""
    arr = load_idx(path)
    if arr.ndim != 1:
        raise FormatError(f"{path}: label IDX must be 1-dimensional, got shape {arr.shape}")
    return arr.astype(np.int64)
