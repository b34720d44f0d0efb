"""In-memory dataset container: a point matrix plus optional integer labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import FormatError


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2:
        raise FormatError(f"points must be a 2-d array, got shape {arr.shape}")
    n, d = arr.shape
    if n < 1 or d < 1:
        raise FormatError(f"points must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FormatError("points contain non-finite values")
    return arr


def _as_labels(labels, n: int) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise FormatError(
            f"labels must be a 1-d array of length {n}, got shape {arr.shape}"
        )
    if not np.issubdtype(arr.dtype, np.integer):
        flo = np.asarray(labels, dtype=np.float64)
        if not np.all(flo == np.floor(flo)):
            raise FormatError("labels must be integers")
        arr = flo.astype(np.int64)
    arr = arr.astype(np.int64)
    if arr.min() < 0:
        raise FormatError("labels must be nonnegative")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Immutable (points, labels) pair with an informal name tag.

    ``points`` is an (n, d) float64 array; ``labels``, when present, is a
    length-n array of nonnegative integers.  Both arrays are stored
    read-only so a Dataset can be shared freely between pipeline stages.
    ``name`` is a display tag and does not participate in equality.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = field(default=None)
    name: str = ""

    def __post_init__(self):
        pts = _as_points(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = _as_labels(self.labels, pts.shape[0])
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_classes(self) -> int:
        """Number of label classes, ``max(labels) + 1``; 0 when unlabeled."""
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def without_labels(self) -> "Dataset":
        return Dataset(self.points, name=self.name)

    def subset(self, indices) -> "Dataset":
        """Row subset (copy); keeps labels when present."""
        idx = np.asarray(indices, dtype=np.int64)
        pts = self.points[idx].copy()
        lab = None if self.labels is None else self.labels[idx].copy()
        return Dataset(pts, lab, name=self.name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.points.shape != other.points.shape:
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is not None and not np.array_equal(self.labels, other.labels):
            return False
        return True

    def __hash__(self):
        return hash((self.points.shape, self.points.tobytes()))
