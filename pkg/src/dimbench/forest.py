"""Random forest classifier: bagged CART trees with Gini splits.

Written for exact reproducibility: per-tree RNG streams are spawned from
the forest seed, nodes are expanded in a fixed preorder, and every
tie-break (equal Gini, equal votes) is deterministic, so refitting with
the same inputs reproduces identical trees and predictions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .dataset import Dataset
from .errors import ConfigError


@dataclass(frozen=True)
class ForestParams:
    """Hyperparameters; mtry defaults to ceil(sqrt(d)) at fit time."""

    n_trees: int = 100
    max_depth: Optional[int] = None
    mtry: Optional[int] = None
    min_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            raise ConfigError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")


@dataclass
class _Tree:
    """Flat-array binary tree; leaves have feature == -1."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    pred: np.ndarray

    def predict(self, points: np.ndarray) -> np.ndarray:
        out = np.empty(points.shape[0], dtype=np.int64)
        stack: List[Tuple[int, np.ndarray]] = [(0, np.arange(points.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                out[idx] = self.pred[node]
                continue
            goes_left = points[idx, f] <= self.threshold[node]
            stack.append((self.right[node], idx[~goes_left]))
            stack.append((self.left[node], idx[goes_left]))
        return out


@dataclass
class Forest:
    trees: List[_Tree]
    n_classes: int
    n_features: int
    params: ForestParams


def _gini_best_split(
    values: np.ndarray, onehot: np.ndarray, min_leaf: int
) -> Tuple[float, float]:
    """Best (weighted child Gini, threshold) along one feature, or
    (inf, nan) when no valid split exists."""
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    v = values[order]
    cum = np.cumsum(onehot[order], axis=0)  # class counts left of each cut
    total = cum[-1]

    pos = np.arange(min_leaf, n - min_leaf + 1)
    pos = pos[v[pos - 1] < v[pos]] if pos.size else pos
    if pos.size == 0:
        return math.inf, math.nan
    left = cum[pos - 1]
    right = total[None, :] - left
    n_left = pos.astype(np.float64)
    n_right = n - n_left
    gini_left = 1.0 - ((left / n_left[:, None]) ** 2).sum(axis=1)
    gini_right = 1.0 - ((right / n_right[:, None]) ** 2).sum(axis=1)
    weighted = (n_left * gini_left + n_right * gini_right) / n
    best = int(weighted.argmin())
    threshold = 0.5 * (v[pos[best] - 1] + v[pos[best]])
    return float(weighted[best]), float(threshold)


def _grow_tree(
    points: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    params: ForestParams,
    mtry: int,
    rng: np.random.Generator,
) -> _Tree:
    n, d = points.shape
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    pred: List[int] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(math.nan)
        left.append(-1)
        right.append(-1)
        pred.append(-1)
        return len(feature) - 1

    root = new_node()
    # preorder expansion: children pushed right-then-left so the left
    # subtree consumes RNG draws first — keeps trees reproducible
    stack: List[Tuple[int, np.ndarray, int]] = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y_node = y[idx]
        counts = np.bincount(y_node, minlength=n_classes)
        majority = int(counts.argmax())  # ties -> smaller class id
        pure = counts.max() == idx.size
        depth_capped = params.max_depth is not None and depth >= params.max_depth
        if pure or depth_capped or idx.size < 2 * params.min_leaf:
            pred[node] = majority
            continue

        feats = rng.choice(d, size=mtry, replace=False)
        onehot = np.zeros((idx.size, n_classes), dtype=np.float64)
        onehot[np.arange(idx.size), y_node] = 1.0
        best_gini, best_thr, best_f = math.inf, math.nan, -1
        for f in feats:
            g, thr = _gini_best_split(points[idx, f], onehot, params.min_leaf)
            if g < best_gini:
                best_gini, best_thr, best_f = g, thr, int(f)
        if best_f < 0:
            pred[node] = majority  # all sampled features constant here
            continue
        goes_left = points[idx, best_f] <= best_thr
        feature[node] = best_f
        threshold[node] = best_thr
        left_id, right_id = new_node(), new_node()
        left[node], right[node] = left_id, right_id
        stack.append((right_id, idx[~goes_left], depth + 1))
        stack.append((left_id, idx[goes_left], depth + 1))

    return _Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        pred=np.asarray(pred, dtype=np.int64),
    )


def rf_fit(ds: Dataset, params: ForestParams = ForestParams()) -> Forest:
    """Fit n_trees CART trees, each on a bootstrap resample of ds, with
    mtry features sampled uniformly per node."""
    if not ds.has_labels:
        raise ConfigError("rf_fit requires a labeled dataset")
    n_classes = ds.n_classes
    if n_classes < 2:
        raise ConfigError(f"need >= 2 classes, got {n_classes}")
    d = ds.d
    mtry = params.mtry if params.mtry is not None else math.ceil(math.sqrt(d))
    if not 1 <= mtry <= d:
        raise ConfigError(f"mtry must be in [1, {d}], got {mtry}")

    seeds = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng(seeds[t])
        rows = rng.integers(0, ds.n, size=ds.n)
        trees.append(
            _grow_tree(
                ds.points[rows], ds.labels[rows], n_classes, params, mtry, rng
            )
        )
    return Forest(trees=trees, n_classes=n_classes, n_features=d, params=params)


def rf_predict(forest: Forest, points) -> np.ndarray:
    """Majority vote over trees; ties broken toward the smaller class id."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != forest.n_features:
        raise ConfigError(
            f"points must be (m, {forest.n_features}), got {pts.shape}"
        )
    votes = np.zeros((pts.shape[0], forest.n_classes), dtype=np.int64)
    for tree in forest.trees:
        votes[np.arange(pts.shape[0]), tree.predict(pts)] += 1
    return votes.argmax(axis=1)


def stratified_folds(
    labels: np.ndarray, folds: int, seed: int
) -> np.ndarray:
    """Fold id per point: class indices shuffled, then dealt round-robin.
    Falls back to unstratified dealing (with a warning) when any class is
    smaller than the fold count."""
    n = labels.shape[0]
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    class_sizes = np.bincount(labels)
    if class_sizes.min() < folds:
        warnings.warn(
            f"stratified_folds: smallest class ({class_sizes.min()}) < folds "
            f"({folds}); falling back to unstratified folds"
        )
        perm = rng.permutation(n)
        fold_of[perm] = np.arange(n) % folds
        return fold_of
    for c in range(class_sizes.shape[0]):
        idx = rng.permutation(np.flatnonzero(labels == c))
        fold_of[idx] = np.arange(idx.shape[0]) % folds
    return fold_of


def cross_val_accuracy(
    ds: Dataset,
    params: ForestParams = ForestParams(),
    folds: int = 10,
    seed: int = 0,
) -> Tuple[float, float]:
    """Stratified k-fold cross-validated accuracy: (mean, sd over folds)."""
    if not ds.has_labels:
        raise ConfigError("cross_val_accuracy requires labels")
    if folds < 2:
        raise ConfigError(f"folds must be >= 2, got {folds}")
    if ds.n < folds:
        raise ConfigError(f"need n >= folds, got n={ds.n}, folds={folds}")
    fold_of = stratified_folds(ds.labels, folds, seed)
    accuracies = np.empty(folds, dtype=np.float64)
    for f in range(folds):
        test = fold_of == f
        train = ds.subset(np.flatnonzero(~test))
        forest = rf_fit(train, params)
        pred = rf_predict(forest, ds.points[test])
        accuracies[f] = float((pred == ds.labels[test]).mean())
    return float(accuracies.mean()), float(accuracies.std(ddof=1))
