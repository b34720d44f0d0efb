"""Index-space bootstrap splits for stability analysis.

A split cuts a seeded permutation of [0, n) into one shared block (40% of
n) and three disjoint unique blocks (20% each).  Bootstrap dataset i is
shared + unique_i, i.e. 60% of the data, and any two bootstrap datasets
agree exactly on the shared block.  Splitting happens purely in index
space so the same split can be reused across every embedding dimension of
the same underlying items.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ConfigError

N_BOOTSTRAPS = 3
SHARED_FRACTION = 0.4
UNIQUE_FRACTION = 0.2


@dataclass(frozen=True)
class BootstrapSplit:
    """One shared index block plus three pairwise-disjoint unique blocks."""

    shared: np.ndarray
    unique: Tuple[np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        shared = np.asarray(self.shared, dtype=np.int64)
        shared.setflags(write=False)
        object.__setattr__(self, "shared", shared)
        blocks = []
        for u in self.unique:
            arr = np.asarray(u, dtype=np.int64)
            arr.setflags(write=False)
            blocks.append(arr)
        if len(blocks) != N_BOOTSTRAPS:
            raise ConfigError(f"expected {N_BOOTSTRAPS} unique blocks")
        object.__setattr__(self, "unique", tuple(blocks))

    def fit_indices(self, i: int) -> np.ndarray:
        """Sorted indices of bootstrap dataset i (shared + unique_i)."""
        return np.sort(np.concatenate([self.shared, self.unique[i]]))


def bootstrap_split(n: int, seed: int) -> BootstrapSplit:
    """Cut a seeded permutation of [0, n) into 40/20/20/20 blocks.

    Block sizes are floor(0.4·n) and floor(0.2·n); remainder indices are
    left unassigned so the blocks stay exactly disjoint.
    """
    if n < 5:
        raise ConfigError(f"n must be >= 5 for a bootstrap split, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_shared = (2 * n) // 5  # floor(0.4 n), exact in integer arithmetic
    n_unique = n // 5  # floor(0.2 n)
    shared = perm[:n_shared]
    unique = tuple(
        perm[n_shared + i * n_unique : n_shared + (i + 1) * n_unique]
        for i in range(N_BOOTSTRAPS)
    )
    return BootstrapSplit(shared, unique)
