"""Partition-comparison metrics: adjusted Rand index, Fowlkes-Mallows,
homogeneity / completeness / V-measure, and all-pairs ARI summaries.

Pair counts are computed from the contingency table in exact integer
arithmetic (Python ints), converting to floating point only for the final
division, so values match a brute-force O(n²) pair scan to machine
precision even at n = 10⁴ and beyond.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError
from .partition import Partition, compact_labels

LabelsLike = Union[Partition, np.ndarray, Sequence[int]]


def _labels_of(x: LabelsLike) -> np.ndarray:
    if isinstance(x, Partition):
        return x.labels
    return compact_labels(x)


@dataclass(frozen=True)
class ContingencyTable:
    """Co-membership counts n_ij with row sums a_i, column sums b_j."""

    counts: np.ndarray
    a: np.ndarray
    b: np.ndarray
    n: int


def contingency(x: LabelsLike, y: LabelsLike) -> ContingencyTable:
    """Exact co-membership counts between two labelings of the same points."""
    xl, yl = _labels_of(x), _labels_of(y)
    if xl.shape[0] != yl.shape[0]:
        raise ConfigError(
            f"partitions cover different point counts: {xl.shape[0]} vs {yl.shape[0]}"
        )
    kx = int(xl.max()) + 1
    ky = int(yl.max()) + 1
    counts = np.zeros((kx, ky), dtype=np.int64)
    np.add.at(counts, (xl, yl), 1)
    return ContingencyTable(
        counts=counts,
        a=counts.sum(axis=1),
        b=counts.sum(axis=0),
        n=int(xl.shape[0]),
    )


def _comb2(values) -> int:
    """Σ C(v, 2) in exact integer arithmetic."""
    total = 0
    for v in np.asarray(values).ravel():
        v = int(v)
        total += v * (v - 1) // 2
    return total


def ari(x: LabelsLike, y: LabelsLike) -> float:
    """Adjusted Rand index between two partitions.

    Computed from the contingency table as
    (Σ_ij C(n_ij,2) − Σ_i C(a_i,2) Σ_j C(b_j,2)/C(n,2)) over
    (½[Σ_i C(a_i,2) + Σ_j C(b_j,2)] − Σ_i C(a_i,2) Σ_j C(b_j,2)/C(n,2)),
    cleared of the C(n,2) denominator so everything stays integral.
    Degenerate denominator (both partitions all singletons or both one
    block): returns 1.0 when the partitions are identical, else 0.0.
    """
    ct = contingency(x, y)
    n2 = int(ct.n) * (int(ct.n) - 1) // 2
    sum_ij = _comb2(ct.counts)
    sa = _comb2(ct.a)
    sb = _comb2(ct.b)
    num2 = 2 * (n2 * sum_ij - sa * sb)
    den2 = n2 * (sa + sb) - 2 * sa * sb
    if den2 == 0:
        return 1.0 if np.array_equal(_labels_of(x), _labels_of(y)) else 0.0
    return num2 / den2


def fowlkes_mallows(x: LabelsLike, y: LabelsLike) -> float:
    """Fowlkes-Mallows score: TP/√((TP+FP)(TP+FN)) over point pairs.

    No chance adjustment.  When either partition has no co-grouped pair
    (all singletons) the score is 0 by convention, with a warning.
    """
    ct = contingency(x, y)
    tp = _comb2(ct.counts)
    sa = _comb2(ct.a)  # pairs together in x = TP + FP
    sb = _comb2(ct.b)  # pairs together in y = TP + FN
    if sa == 0 or sb == 0:
        warnings.warn(
            "fowlkes_mallows: degenerate all-singleton partition, returning 0",
            stacklevel=2,
        )
        return 0.0
    return tp / math.sqrt(sa * sb)


def _entropy(counts: np.ndarray, n: int) -> float:
    """Natural-log entropy of a count vector."""
    p = counts[counts > 0].astype(np.float64) / n
    return float(-np.sum(p * np.log(p)))


def homogeneity(pred: LabelsLike, truth: LabelsLike) -> float:
    """1 − H(truth|pred)/H(truth); 1.0 when the truth has a single class."""
    ct = contingency(pred, truth)
    h_truth = _entropy(ct.b, ct.n)
    if h_truth == 0.0:
        return 1.0
    # H(truth | pred) = −Σ_ij (n_ij/n) ln(n_ij / a_i)
    rows, cols = np.nonzero(ct.counts)
    nij = ct.counts[rows, cols].astype(np.float64)
    ai = ct.a[rows].astype(np.float64)
    h_cond = float(-np.sum((nij / ct.n) * np.log(nij / ai)))
    return 1.0 - h_cond / h_truth


def completeness(pred: LabelsLike, truth: LabelsLike) -> float:
    """Swap-symmetric counterpart of homogeneity: completeness(p,t) ==
    homogeneity(t,p) exactly, by construction."""
    return homogeneity(truth, pred)


def v_measure(pred: LabelsLike, truth: LabelsLike) -> float:
    """Harmonic mean of homogeneity and completeness; 0 when both are 0."""
    h = homogeneity(pred, truth)
    c = completeness(pred, truth)
    if h + c == 0.0:
        return 0.0
    return 2.0 * h * c / (h + c)


nmi = v_measure  # equivalent normalization; exposed under both names


def pairwise_ari(
    parts: List[LabelsLike],
) -> Tuple[float, float, np.ndarray]:
    """ARI over all unordered pairs of ≥2 partitions.

    Returns (mean, sd, matrix) where mean and sd summarize the strict
    upper triangle; sd is the sample standard deviation (ddof=1), defined
    as 0.0 when only one pair exists.
    """
    if len(parts) < 2:
        raise ConfigError(f"need at least 2 partitions, got {len(parts)}")
    m = len(parts)
    labels = [_labels_of(p) for p in parts]
    matrix = np.eye(m, dtype=np.float64)
    values = []
    for i in range(m):
        for j in range(i + 1, m):
            val = ari(labels[i], labels[j])
            matrix[i, j] = matrix[j, i] = val
            values.append(val)
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, sd, matrix
