"""Density-peak diagnostics (ρ, δ, γ) and internal validity indices.

The ρ–δ construction: every point gets a kernelized neighbor count ρ_i
within a radius r chosen as a percentile of all pairwise distances, and a
distance δ_i to the nearest point with higher density.  Points with both
large ρ and large δ — upper-right outliers of the ρ–δ diagram — are
natural cluster centers, and γ = ρ·δ ranks candidates.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .dataset import Dataset
from .errors import ConfigError, ParseError
from .partition import Partition

KERNELS = ("gaussian", "exponential")
_BLOCK = 512
# Cap on the temporary (rows, n, d) difference tensor used for ρ/δ blocks.
_DIFF_BUDGET = 4_000_000


def _pairwise_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances between every row of ``a`` and every row of ``b``,
    evaluated as sqrt(Σ_k (a_ik − b_jk)²) with the reduction running over the
    contiguous coordinate axis.  This keeps the floating-point result equal
    to the one obtained by scanning pairs one at a time, which cdist's
    vectorized kernels do not guarantee."""
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _row_block(n: int, d: int) -> int:
    return max(1, _DIFF_BUDGET // max(1, n * d))


@dataclass(frozen=True)
class DensityPeakProfile:
    """Per-point density-peak statistics for one radius r."""

    rho: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    r: float
    percentile: float


def distance_percentile(ds: Dataset, pth: float) -> float:
    """The pth percentile (linear interpolation) of all n(n−1)/2 pairwise
    Euclidean distances."""
    if ds.n < 2:
        raise ConfigError(f"need n >= 2 points, got {ds.n}")
    if not 0.0 < pth <= 100.0:
        raise ConfigError(f"percentile must be in (0, 100], got {pth}")
    return float(np.percentile(pdist(ds.points), pth))


def local_density(ds: Dataset, r: float, kernel: str = "gaussian") -> np.ndarray:
    """Soft neighbor count ρ_i = Σ_{j≠i} K(d_ij/r).

    kernel "gaussian" (default): K(t) = exp(−t²); "exponential": exp(−t).
    """
    if not r > 0:
        raise ConfigError(f"radius must be positive, got {r}")
    if kernel not in KERNELS:
        raise ConfigError(f"unknown kernel {kernel!r}")
    n = ds.n
    rho = np.empty(n, dtype=np.float64)
    block = _row_block(n, ds.d)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = _pairwise_rows(ds.points[start:stop], ds.points) / r
        if kernel == "gaussian":
            k = np.exp(-(d**2))
        else:
            k = np.exp(-d)
        idx = np.arange(start, stop)
        k[idx - start, idx] = 0.0  # exclude self
        rho[start:stop] = k.sum(axis=1)
    return rho


def delta_distances(ds: Dataset, rho: np.ndarray) -> np.ndarray:
    """δ_i = distance to the nearest denser point; density ties broken by
    index (j counts as denser when ρ_j = ρ_i and j < i).  The single point
    with no denser point gets δ = max over all pairwise distances."""
    n = ds.n
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != (n,):
        raise ConfigError(f"rho must have shape ({n},), got {rho.shape}")
    # rank[i] = position of i when sorted by (ρ descending, index ascending);
    # j is "denser than i" exactly when rank[j] < rank[i]
    order = np.lexsort((np.arange(n), -rho))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)

    delta = np.empty(n, dtype=np.float64)
    max_dist = 0.0
    block = _row_block(n, ds.d)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = _pairwise_rows(ds.points[start:stop], ds.points)
        if n > 1:
            max_dist = max(max_dist, float(d.max()))
        denser = rank[None, :] < rank[start:stop, None]
        d[~denser] = np.inf
        delta[start:stop] = d.min(axis=1)
    delta[order[0]] = max_dist
    return delta


def density_peak_profile(
    ds: Dataset, pth: float, kernel: str = "gaussian"
) -> DensityPeakProfile:
    """Compose radius selection, ρ, δ, and γ = ρ·δ for one percentile."""
    r = distance_percentile(ds, pth)
    rho = local_density(ds, r, kernel)
    delta = delta_distances(ds, rho)
    return DensityPeakProfile(
        rho=rho, delta=delta, gamma=rho * delta, r=r, percentile=float(pth)
    )


def top_gamma(profile: DensityPeakProfile, m: int = 30) -> List[Tuple[int, float]]:
    """The m largest γ values as (index, γ), descending, ties by index."""
    n = profile.gamma.shape[0]
    if m > n:
        warnings.warn(f"top_gamma: m={m} > n={n}, clamping to n")
        m = n
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    order = np.lexsort((np.arange(n), -profile.gamma))
    return [(int(i), float(profile.gamma[i])) for i in order[:m]]


def gamma_gap_peaks(profile: DensityPeakProfile, ratio: float = 2.0) -> int:
    """Optional heuristic: count of leading γ values before the first gap
    where consecutive sorted γ drop by more than ``ratio``.  Diagnostic
    only; peak selection is normally left to visual inspection."""
    gamma = np.sort(profile.gamma)[::-1]
    for i in range(len(gamma) - 1):
        if gamma[i + 1] <= 0 or gamma[i] / gamma[i + 1] > ratio:
            return i + 1
    return len(gamma)


def save_profile_csv(profile: DensityPeakProfile, path: Union[str, Path]) -> None:
    """Serialize a profile as CSV columns index,rho,delta,gamma."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "rho", "delta", "gamma"])
        for i in range(profile.rho.shape[0]):
            writer.writerow(
                [
                    i,
                    repr(float(profile.rho[i])),
                    repr(float(profile.delta[i])),
                    repr(float(profile.gamma[i])),
                ]
            )


def load_profile_csv(
    path: Union[str, Path], r: float = float("nan"), percentile: float = float("nan")
) -> DensityPeakProfile:
    """Read a profile written by :func:`save_profile_csv`."""
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [row for row in rows if row]
    if not rows or rows[0] != ["index", "rho", "delta", "gamma"]:
        raise ParseError(f"{path}: expected 'index,rho,delta,gamma' header")
    body = rows[1:]
    rho = np.empty(len(body))
    delta = np.empty(len(body))
    gamma = np.empty(len(body))
    for line_no, row in enumerate(body, start=2):
        if len(row) != 4:
            raise ParseError(f"{path}: line {line_no}: expected 4 fields")
        try:
            idx = int(row[0])
            rho[idx] = float(row[1])
            delta[idx] = float(row[2])
            gamma[idx] = float(row[3])
        except (ValueError, IndexError):
            raise ParseError(f"{path}: line {line_no}: bad row {row!r}") from None
    return DensityPeakProfile(
        rho=rho, delta=delta, gamma=gamma, r=r, percentile=percentile
    )


def s_dbw(ds: Dataset, part: Partition) -> float:
    """S_Dbw validity index (lower is better): within-cluster scatter plus
    between-cluster midpoint density.

    Scat  = (1/k) Σ_c ‖var(c)‖ / ‖var(dataset)‖, per-coordinate variance
            vectors (ddof=0), Euclidean norms.
    σ     = (1/k) √(Σ_c ‖var(c)‖)
    dens(p, S) = #{x ∈ S : ‖x−p‖ ≤ σ}
    Dens_bw = mean over ordered pairs c≠c' of
            dens(midpoint(μ_c,μ_c'), c∪c') / max(dens(μ_c, c∪c'),
            dens(μ_c', c∪c')), with 0/0 → 0.
    """
    if part.n != ds.n:
        raise ConfigError(
            f"partition covers {part.n} points, dataset has {ds.n}"
        )
    k = part.k
    if k < 2:
        raise ConfigError(f"s_dbw needs k >= 2 clusters, got {k}")
    labels = part.labels
    dataset_var_norm = float(np.linalg.norm(ds.points.var(axis=0)))
    if dataset_var_norm == 0.0:
        raise ConfigError("s_dbw undefined: dataset has zero variance")

    members = [ds.points[labels == c] for c in range(k)]
    mus = np.stack([m.mean(axis=0) for m in members])
    var_norms = np.array([np.linalg.norm(m.var(axis=0)) for m in members])
    scat = float(var_norms.mean() / dataset_var_norm)
    sigma = float(np.sqrt(var_norms.sum()) / k)

    def dens(point: np.ndarray, cloud: np.ndarray) -> int:
        return int(
            (np.linalg.norm(cloud - point, axis=1) <= sigma).sum()
        )

    total = 0.0
    for c in range(k):
        for c2 in range(k):
            if c2 == c:
                continue
            cloud = np.vstack([members[c], members[c2]])
            mid = 0.5 * (mus[c] + mus[c2])
            denom = max(dens(mus[c], cloud), dens(mus[c2], cloud))
            num = dens(mid, cloud)
            if denom == 0:
                continue  # 0/0 convention -> contributes 0
            total += num / denom
    dens_bw = total / (k * (k - 1))
    return scat + dens_bw


def silhouette(ds: Dataset, part: Partition) -> float:
    """Mean silhouette score; singleton clusters contribute 0.  Plumbing
    for report tables, no acceptance weight."""
    if part.n != ds.n:
        raise ConfigError(
            f"partition covers {part.n} points, dataset has {ds.n}"
        )
    k = part.k
    if k < 2:
        raise ConfigError(f"silhouette needs k >= 2 clusters, got {k}")
    labels = part.labels
    sizes = np.bincount(labels, minlength=k)
    n = ds.n
    scores = np.zeros(n, dtype=np.float64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        d = cdist(ds.points[start:stop], ds.points)
        # mean distance from each row point to every cluster
        cluster_sums = np.stack(
            [d[:, labels == c].sum(axis=1) for c in range(k)], axis=1
        )
        own = labels[start:stop]
        rows = np.arange(stop - start)
        a_sz = sizes[own] - 1
        with np.errstate(invalid="ignore", divide="ignore"):
            a = cluster_sums[rows, own] / a_sz
            mean_other = cluster_sums / sizes[None, :]
            mean_other[rows, own] = np.inf
            b = mean_other.min(axis=1)
            s = (b - a) / np.maximum(a, b)
        s[a_sz == 0] = 0.0  # singleton convention
        scores[start:stop] = s
    return float(scores.mean())
