"""Lloyd's k-means with k-means++ seeding.

Determinism: given (dataset, k, seed) the trajectory is fully determined.
Empty clusters never abort a run; an empty centroid is re-seeded at the
point currently farthest from its assigned centroid, which cannot
increase the objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .errors import ConfigError
from .partition import Partition


@dataclass(frozen=True)
class KmeansResult:
    partition: Partition
    inertia: float
    centers: np.ndarray
    inertia_history: List[float]
    n_iter: int


def _plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: D²-weighted sequential center choice."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining points coincide with a center; pick uniformly
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def kmeans(
    ds: Dataset, k: int, seed: int, max_iter: int = 300, tol: float = 1e-6
) -> KmeansResult:
    """Cluster ``ds`` into k groups; returns partition, final inertia,
    centers, and the per-iteration inertia history (non-increasing)."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if ds.n < k:
        raise ConfigError(f"need n >= k, got n={ds.n}, k={k}")
    points = ds.points
    rng = np.random.default_rng(seed)
    centers = _plusplus_init(points, k, rng)

    history: List[float] = []
    assign = np.zeros(ds.n, dtype=np.int64)
    for iteration in range(1, max_iter + 1):
        d2 = cdist(points, centers, "sqeuclidean")
        assign = d2.argmin(axis=1)
        point_cost = d2[np.arange(ds.n), assign]

        # Re-seed any empty cluster at the globally worst-fit point.
        for c in range(k):
            if not np.any(assign == c):
                worst = int(point_cost.argmax())
                centers[c] = points[worst]
                assign[worst] = c
                point_cost[worst] = 0.0

        inertia = float(point_cost.sum())
        history.append(inertia)
        if len(history) >= 2:
            prev = history[-2]
            if inertia == 0.0 or (prev > 0.0 and (prev - inertia) / prev < tol):
                break
        if iteration < max_iter:  # keep centers consistent with final assignment
            for c in range(k):
                centers[c] = points[assign == c].mean(axis=0)

    return KmeansResult(
        partition=Partition(assign),
        inertia=history[-1],
        centers=centers.copy(),
        inertia_history=history,
        n_iter=len(history),
    )
