import warnings

import numpy as np
import pytest

from dimbench.dataset import Dataset
from dimbench.errors import ConfigError
from dimbench.forest import (
    ForestParams,
    cross_val_accuracy,
    rf_fit,
    rf_predict,
    stratified_folds,
)

from conftest import make_blobs


def test_fit_predict_separable(rng):
    ds = make_blobs(rng, n_per=40, k=3, d=2, spread=12.0)
    forest = rf_fit(ds, ForestParams(n_trees=25, seed=0))
    pred = rf_predict(forest, ds.points)
    assert (pred == ds.labels).mean() > 0.97


def test_deterministic_in_seed(rng):
    ds = make_blobs(rng, n_per=30, k=2, d=3, spread=2.0)
    grid = rng.normal(size=(50, 3))
    a = rf_predict(rf_fit(ds, ForestParams(n_trees=15, seed=4)), grid)
    b = rf_predict(rf_fit(ds, ForestParams(n_trees=15, seed=4)), grid)
    np.testing.assert_array_equal(a, b)


def test_single_class_dataset_rejected(rng):
    ds = Dataset(rng.normal(size=(20, 2)), np.zeros(20, dtype=np.int64))
    with pytest.raises(ConfigError):
        rf_fit(ds, ForestParams(n_trees=5, seed=0))


def test_stratified_folds_balance(rng):
    labels = np.repeat(np.arange(3), 30)
    fold_of = stratified_folds(labels, folds=5, seed=0)
    for f in range(5):
        per_class = np.bincount(labels[fold_of == f], minlength=3)
        assert per_class.tolist() == [6, 6, 6]


def test_stratified_folds_cover_everything(rng):
    labels = rng.integers(0, 3, size=47)
    fold_of = stratified_folds(labels, folds=4, seed=1)
    assert fold_of.min() >= 0 and fold_of.max() <= 3
    assert np.bincount(fold_of).sum() == 47


def test_tiny_class_falls_back_with_warning():
    labels = np.array([0] * 20 + [1])
    with pytest.warns(UserWarning):
        fold_of = stratified_folds(labels, folds=5, seed=0)
    assert len(fold_of) == 21


def test_cross_val_accuracy_separable(rng):
    ds = make_blobs(rng, n_per=40, k=2, d=2, spread=12.0)
    mean, sd = cross_val_accuracy(ds, ForestParams(n_trees=20, seed=0), folds=4, seed=0)
    assert mean > 0.95
    assert sd >= 0.0


def test_cross_val_accuracy_noise_near_chance(rng):
    pts = rng.normal(size=(120, 2))
    labels = rng.integers(0, 2, size=120)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mean, _ = cross_val_accuracy(
            Dataset(pts, labels), ForestParams(n_trees=20, seed=0), folds=4, seed=0
        )
    assert 0.3 < mean < 0.7


def test_mtry_depth_leaf_knobs(rng):
    ds = make_blobs(rng, n_per=25, k=2, d=4, spread=4.0)
    stump = rf_fit(ds, ForestParams(n_trees=5, max_depth=1, seed=0))
    deep = rf_fit(ds, ForestParams(n_trees=5, max_depth=None, mtry=4, min_leaf=1, seed=0))
    acc_stump = (rf_predict(stump, ds.points) == ds.labels).mean()
    acc_deep = (rf_predict(deep, ds.points) == ds.labels).mean()
    assert acc_deep >= acc_stump


def test_validation():
    with pytest.raises(ConfigError):
        ForestParams(n_trees=0)
    with pytest.raises(ConfigError):
        ForestParams(min_leaf=0)
    with pytest.raises(ConfigError):
        ForestParams(max_depth=0)


def test_cross_val_requires_labels(rng):
    ds = Dataset(rng.normal(size=(20, 2)))
    with pytest.raises(ConfigError):
        cross_val_accuracy(ds, folds=2)
