import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dimbench.errors import ConfigError
from dimbench.metrics import (
    ari,
    completeness,
    contingency,
    fowlkes_mallows,
    homogeneity,
    nmi,
    pairwise_ari,
    v_measure,
)

from oracles import entropy_of, mutual_information, pair_ari_fm

labelings = st.lists(st.integers(0, 5), min_size=2, max_size=40)


def test_contingency_counts():
    t = contingency([0, 0, 1, 1], [0, 1, 1, 1])
    assert t.counts.tolist() == [[1, 1], [0, 2]]
    assert t.a.tolist() == [2, 2]
    assert t.b.tolist() == [1, 3]
    assert t.n == 4


@given(x=labelings, y=labelings)
def test_ari_and_fm_match_pair_scan(x, y):
    n = min(len(x), len(y))
    x, y = np.array(x[:n]), np.array(y[:n])
    o_ari, o_fm = pair_ari_fm(x, y)
    assert ari(x, y) == pytest.approx(o_ari, abs=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # all-singleton inputs warn by design
        assert fowlkes_mallows(x, y) == pytest.approx(o_fm, abs=1e-12)


@given(x=labelings)
def test_ari_identity_and_label_name_invariance(x):
    x = np.array(x)
    assert ari(x, x) == 1.0
    assert ari(x, x * 7 + 2) == 1.0
    assert ari(x * 7 + 2, x) == 1.0


@given(x=labelings, y=labelings)
def test_ari_symmetry(x, y):
    n = min(len(x), len(y))
    x, y = np.array(x[:n]), np.array(y[:n])
    assert ari(x, y) == pytest.approx(ari(y, x), abs=1e-15)


def test_ari_hand_value():
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5


def test_ari_degenerate_cases():
    assert ari([0, 1, 2], [5, 6, 7]) == 1.0  # all singletons, identical grouping
    assert ari([0, 0, 0], [1, 1, 1]) == 1.0  # single block
    assert ari([0], [0]) == 1.0


def test_homogeneity_completeness_asymmetry():
    truth = [0, 0, 1, 1]
    over = [0, 1, 2, 3]  # oversegmented: pure clusters, split classes
    assert homogeneity(over, truth) == 1.0
    assert completeness(over, truth) < 1.0
    under = [0, 0, 0, 0]
    assert completeness(under, truth) == 1.0
    assert homogeneity(under, truth) < 1.0


@given(x=labelings, y=labelings)
def test_v_measure_matches_entropy_formula(x, y):
    n = min(len(x), len(y))
    pred, truth = np.array(x[:n]), np.array(y[:n])
    hk, hc = entropy_of(pred), entropy_of(truth)
    mi = mutual_information(pred, truth)
    h = 1.0 if hc == 0 else mi / hc
    c = 1.0 if hk == 0 else mi / hk
    expected = 0.0 if (h + c) == 0 else 2 * h * c / (h + c)
    assert v_measure(pred, truth) == pytest.approx(expected, abs=1e-10)
    assert homogeneity(pred, truth) == pytest.approx(h, abs=1e-10)
    assert completeness(pred, truth) == pytest.approx(c, abs=1e-10)


def test_nmi_is_v_measure():
    x = np.array([0, 0, 1, 1, 2, 2])
    y = np.array([0, 1, 1, 1, 2, 0])
    assert nmi(x, y) == v_measure(x, y)


def test_random_labelings_near_zero_ari(rng):
    values = [
        ari(rng.integers(0, 10, 400), rng.integers(0, 10, 400)) for _ in range(30)
    ]
    assert abs(float(np.mean(values))) < 0.03


def test_pairwise_ari():
    parts = [
        np.array([0, 0, 1, 1]),
        np.array([0, 0, 1, 1]),
        np.array([0, 1, 0, 1]),
    ]
    mean, sd, matrix = pairwise_ari(parts)
    assert matrix[0, 1] == 1.0
    assert matrix[0, 2] == -0.5
    assert matrix[1, 2] == -0.5
    np.testing.assert_array_equal(matrix, matrix.T)
    values = [1.0, -0.5, -0.5]
    assert mean == pytest.approx(np.mean(values))
    assert sd == pytest.approx(np.std(values, ddof=1))


def test_length_mismatch_rejected():
    with pytest.raises(ConfigError):
        ari([0, 1], [0, 1, 2])
