"""Exact k-nearest-neighbor graphs over full pairwise distances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .errors import ConfigError

WEIGHT_POLICIES = ("unit", "inverse_distance")


@dataclass(frozen=True)
class KnnGraph:
    """Undirected weighted graph in CSR form.

    No self-loops; symmetric (every edge stored in both directions with
    equal weight); all weights positive and finite.
    """

    n_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("indptr", "indices", "weights"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    def neighbors(self, v: int) -> Tuple[np.ndarray, np.ndarray]:
        """(neighbor ids, edge weights) of node v."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    @property
    def n_edges(self) -> int:
        """Number of undirected edges."""
        return self.indices.shape[0] // 2

    @property
    def strengths(self) -> np.ndarray:
        """Weighted degree per node."""
        owner = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        return np.bincount(owner, weights=self.weights, minlength=self.n_nodes)

    @property
    def total_weight(self) -> float:
        """Sum of weights over both directions (2m for unit weights)."""
        return float(self.weights.sum())


def _csr_from_edges(
    n: int, rows: np.ndarray, cols: np.ndarray, weights: np.ndarray
) -> KnnGraph:
    order = np.lexsort((cols, rows))
    rows, cols, weights = rows[order], cols[order], weights[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    return KnnGraph(
        n_nodes=n,
        indptr=indptr,
        indices=cols.astype(np.int64),
        weights=weights.astype(np.float64),
    )


def knn_graph(
    ds: Dataset, n_neighbors: int = 15, weight_policy: str = "unit"
) -> KnnGraph:
    """Exact kNN graph: full pairwise Euclidean distances, distance ties
    broken toward the lower index, directed relation symmetrized by union.

    ``weight_policy``: "unit" gives every edge weight 1; "inverse_distance"
    gives 1/(1+d).
    """
    if weight_policy not in WEIGHT_POLICIES:
        raise ConfigError(f"unknown weight policy {weight_policy!r}")
    n = ds.n
    if n <= n_neighbors:
        raise ConfigError(f"need n > n_neighbors, got n={n}, k={n_neighbors}")
    if n_neighbors < 1:
        raise ConfigError(f"n_neighbors must be >= 1, got {n_neighbors}")
    dist = cdist(ds.points, ds.points)
    np.fill_diagonal(dist, np.inf)
    idx = np.arange(n)
    # lexsort: primary key = distance, ties broken by neighbor index
    order = np.lexsort((np.broadcast_to(idx, (n, n)), dist), axis=1)
    nbrs = order[:, :n_neighbors]

    src = np.repeat(idx, n_neighbors)
    dst = nbrs.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    key = lo * n + hi
    uniq = np.unique(key)
    u = (uniq // n).astype(np.int64)
    v = (uniq % n).astype(np.int64)
    if weight_policy == "unit":
        w = np.ones(u.shape[0], dtype=np.float64)
    else:
        w = 1.0 / (1.0 + dist[u, v])
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    weights = np.concatenate([w, w])
    return _csr_from_edges(n, rows, cols, weights)
