"""Binary dataset container (.mnde).

Layout, all little-endian:

    offset  size  field
    0       4     magic  b"MNDE"
    4       2     version (u16), currently 1
    6       2     flags (u16), bit 0 = labels present
    8       8     n (u64) number of rows
    16      4     d (u32) number of columns
    20      1     dtype code (u8), 1 = float32
    21      3     reserved, zero
    24      n*d*4 coordinates, float32, row-major
    ...     n*2   labels (u16), only when flag bit 0 is set

Coordinates are stored as float32; loading promotes them to float64 for
in-memory computation.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .dataset import Dataset
from .errors import CorruptionError, FormatError, VersionError

MAGIC = b"MNDE"
VERSION = 1
FLAG_LABELS = 0x0001
DTYPE_F32 = 1

_HEADER = struct.Struct("<4sHHQIB3x")
HEADER_SIZE = _HEADER.size  # 24

_LABEL_MAX = np.iinfo(np.uint16).max


def save_mnde(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write ``dataset`` to ``path`` in the container format above."""
    flags = 0
    if dataset.has_labels:
        if dataset.labels.max() > _LABEL_MAX:
            raise FormatError(
                f"labels exceed u16 range (max {_LABEL_MAX}): {dataset.labels.max()}"
            )
        flags |= FLAG_LABELS
    header = _HEADER.pack(
        MAGIC, VERSION, flags, dataset.n, dataset.d, DTYPE_F32
    )
    body = np.ascontiguousarray(dataset.points, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)
        if dataset.has_labels:
            fh.write(np.ascontiguousarray(dataset.labels, dtype="<u2").tobytes())


def load_mnde(path: Union[str, Path]) -> Dataset:
    """Read a dataset written by :func:`save_mnde`.

    Raises :class:`FormatError` when the magic does not match,
    :class:`VersionError` for an unsupported version, dtype, or flag, and
    :class:`CorruptionError` when the payload length disagrees with the
    header.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise FormatError(f"{path}: not an MNDE file (bad magic)")
    if len(raw) < HEADER_SIZE:
        raise CorruptionError(f"{path}: truncated header ({len(raw)} bytes)")
    _, version, flags, n, d, dtype_code = _HEADER.unpack_from(raw, 0)
    if version != VERSION:
        raise VersionError(f"{path}: unsupported version {version}")
    if dtype_code != DTYPE_F32:
        raise VersionError(f"{path}: unsupported dtype code {dtype_code}")
    if flags & ~FLAG_LABELS:
        raise VersionError(f"{path}: unsupported flags 0x{flags:04x}")
    if n < 1 or d < 1:
        raise CorruptionError(f"{path}: header declares empty shape ({n}, {d})")
    has_labels = bool(flags & FLAG_LABELS)
    expected = HEADER_SIZE + n * d * 4 + (n * 2 if has_labels else 0)
    if len(raw) < expected:
        raise CorruptionError(
            f"{path}: truncated payload ({len(raw)} bytes, expected {expected})"
        )
    if len(raw) > expected:
        raise CorruptionError(
            f"{path}: {len(raw) - expected} trailing bytes after payload"
        )
    pts32 = np.frombuffer(raw, dtype="<f4", count=n * d, offset=HEADER_SIZE)
    points = pts32.astype(np.float64).reshape(n, d)
    labels = None
    if has_labels:
        labels = np.frombuffer(
            raw, dtype="<u2", count=n, offset=HEADER_SIZE + n * d * 4
        ).astype(np.int64)
    return Dataset(points, labels, name=Path(path).stem)
