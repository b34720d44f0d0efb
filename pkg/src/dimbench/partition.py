"""Cluster partitions: compact label arrays plus CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError, ParseError


def compact_labels(labels) -> np.ndarray:
    """Renumber labels to 0..k-1 in order of first appearance.

    Two labelings that induce the same grouping compact to identical
    arrays, which makes compaction a canonical form.
    """
    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ConfigError(f"labels must be a non-empty 1-d array, got {arr.shape}")
    uniq, first_pos, inverse = np.unique(
        arr, return_index=True, return_inverse=True
    )
    order = np.argsort(first_pos, kind="stable")  # unique ids by first appearance
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(len(uniq))
    return rank[inverse]


@dataclass(frozen=True)
class Partition:
    """A clustering of n points: labels in [0, k) with every id attained."""

    labels: np.ndarray

    def __post_init__(self):
        lab = compact_labels(self.labels)
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())


def save_partition_csv(part: Partition, path: Union[str, Path]) -> None:
    """Write a partition as two-column CSV: index,label."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "label"])
        for i, lab in enumerate(part.labels):
            writer.writerow([i, int(lab)])


def load_partition_csv(path: Union[str, Path]) -> Partition:
    """Read a partition written by :func:`save_partition_csv`."""
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows or rows[0] != ["index", "label"]:
        raise ParseError(f"{path}: expected 'index,label' header")
    labels = np.empty(len(rows) - 1, dtype=np.int64)
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ParseError(f"{path}: line {line_no}: expected 2 fields")
        try:
            idx, lab = int(row[0]), int(row[1])
        except ValueError:
            raise ParseError(f"{path}: line {line_no}: non-integer field") from None
        if idx != line_no - 2:
            raise ParseError(f"{path}: line {line_no}: indices must be 0,1,2,...")
        labels[idx] = lab
    if labels.size == 0:
        raise ParseError(f"{path}: no rows")
    return Partition(labels)
