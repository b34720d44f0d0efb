"""Synthetic Gaussian-mixture surrogate datasets.

The generator is built so that class separability does not drift as the
embedding dimension grows: class means live in a fixed low-dimensional
signal subspace (the first min(d, 2) coordinates) with per-coordinate
standard deviation c/sqrt(s), and every remaining coordinate is pure unit
noise.  The expected squared distance between two class means is then
2·c² for every d, and for a fixed seed the signal-subspace content is
identical across all d ≥ 2 — raising d only appends noise columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ConfigError

SIGNAL_DIMS = 2


@dataclass(frozen=True)
class SyntheticMixtureSpec:
    """Parameters for :func:`generate_synthetic_mixture`."""

    k: int
    d: int
    n: int
    overlap: float
    seed: int

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if self.n < self.k:
            raise ConfigError(f"n must be >= k, got n={self.n}, k={self.k}")
        if not self.overlap > 0:
            raise ConfigError(f"overlap must be positive, got {self.overlap}")


def generate_synthetic_mixture(spec: SyntheticMixtureSpec) -> Dataset:
    """Draw a balanced isotropic Gaussian mixture per ``spec``.

    Class means are i.i.d. N(0, (c/sqrt(s))²) in the first s = min(d, 2)
    coordinates and zero elsewhere; components have unit isotropic
    covariance; point i belongs to class i mod k.  Deterministic in seed.
    """
    k, d, n, c = spec.k, spec.d, spec.n, spec.overlap
    rng = np.random.default_rng(spec.seed)
    s = min(d, SIGNAL_DIMS)
    means = rng.normal(0.0, c / np.sqrt(s), size=(k, s))
    labels = np.arange(n, dtype=np.int64) % k
    core = rng.normal(size=(n, s))
    points = np.zeros((n, d), dtype=np.float64)
    points[:, :s] = means[labels] + core
    if d > s:
        points[:, s:] = rng.normal(size=(n, d - s))
    return Dataset(points, labels, name=f"synth-k{k}-d{d}-n{n}")


def calibrate_overlap(
    target_accuracy: float = 0.90,
    *,
    k: int = 10,
    n: int = 5000,
    d: int = 2,
    seed: int = 0,
    folds: int = 10,
    lo: float = 1.0,
    hi: float = 32.0,
    iterations: int = 12,
) -> float:
    """Bisect for the overlap c whose cross-validated forest accuracy hits
    ``target_accuracy`` on a d-dimensional draw.

    Accuracy increases monotonically in c (classes move apart), so plain
    bisection converges.  Used once, offline, to freeze the benchmark's
    default overlap; kept here so the derivation is reproducible.
    """
    from .forest import ForestParams, cross_val_accuracy

    def accuracy(c: float) -> float:
        ds = generate_synthetic_mixture(SyntheticMixtureSpec(k, d, n, c, seed))
        mean, _ = cross_val_accuracy(
            ds, ForestParams(seed=seed), folds=folds, seed=seed
        )
        return mean

    if accuracy(lo) > target_accuracy or accuracy(hi) < target_accuracy:
        raise ConfigError(
            f"target accuracy {target_accuracy} not bracketed by c in [{lo}, {hi}]"
        )
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if accuracy(mid) < target_accuracy:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
