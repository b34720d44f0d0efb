"""Writer for the MNDE embedding container the benchmark suite consumes.

Little-endian layout: a 24-byte header — magic ``"MNDE"``, uint16 version
(1), uint16 flags (bit 0: labels present), uint64 n, uint32 d, uint8
dtype code (1 = float32), three reserved zero bytes — followed by n·d
float32 coordinates row-major, then n uint16 labels when flagged.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, FormatError

MAGIC = b"MNDE"
VERSION = 1
_HEADER = struct.Struct("<4sHHQIB3x")
_FLAG_LABELS = 0x0001
_DTYPE_F32 = 1


def mnde_bytes(points: np.ndarray, labels: Optional[np.ndarray] = None) -> bytes:
    """Serialize an embedding (and optional labels) to MNDE bytes."""
    pts = np.ascontiguousarray(points, dtype=np.float32)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ConfigError(f"points must be a non-empty 2-d array, got shape {points.shape}")
    n, d = pts.shape
    flags = 0
    label_bytes = b""
    if labels is not None:
        lab = np.asarray(labels)
        if lab.shape != (n,):
            raise ConfigError(f"labels must have shape ({n},), got {lab.shape}")
        if lab.min() < 0 or lab.max() > np.iinfo(np.uint16).max:
            raise FormatError(
                f"labels must fit uint16, got range [{lab.min()}, {lab.max()}]"
            )
        flags |= _FLAG_LABELS
        label_bytes = np.ascontiguousarray(lab, dtype="<u2").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, flags, n, d, _DTYPE_F32)
    return header + pts.astype("<f4", copy=False).tobytes() + label_bytes


def save_mnde(
    points: np.ndarray,
    labels: Optional[np.ndarray],
    path: Union[str, Path],
) -> Path:
    """Write an MNDE file; parent directories are created as needed."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(mnde_bytes(points, labels))
    return out
