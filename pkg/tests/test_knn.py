import numpy as np
import pytest

from dimbench.dataset import Dataset
from dimbench.errors import ConfigError
from dimbench.knn import knn_graph

from oracles import brute_knn_edges


def _edge_set(g):
    edges = set()
    for v in range(g.n_nodes):
        nbrs, _ = g.neighbors(v)
        for u in nbrs:
            edges.add((min(v, int(u)), max(v, int(u))))
    return edges


def test_matches_brute_force_oracle(rng):
    for trial in range(5):
        n = int(rng.integers(10, 60))
        d = int(rng.integers(2, 5))
        k = int(rng.integers(1, 6))
        pts = rng.normal(size=(n, d))
        g = knn_graph(Dataset(pts), n_neighbors=k)
        assert _edge_set(g) == brute_knn_edges(pts, k), f"trial {trial}"


def test_csr_is_symmetric_no_self_loops(rng):
    pts = rng.normal(size=(40, 3))
    g = knn_graph(Dataset(pts), n_neighbors=4)
    seen = {}
    for v in range(g.n_nodes):
        nbrs, w = g.neighbors(v)
        assert v not in nbrs.tolist()
        for u, weight in zip(nbrs.tolist(), w.tolist()):
            seen[(v, u)] = weight
    for (v, u), weight in seen.items():
        assert seen[(u, v)] == weight  # both directions, equal weight
    assert len(seen) == 2 * g.n_edges


def test_unit_weights(rng):
    g = knn_graph(Dataset(rng.normal(size=(20, 2))), n_neighbors=3)
    assert set(np.asarray(g.weights).tolist()) == {1.0}
    assert g.total_weight == 2.0 * g.n_edges


def test_inverse_distance_weights(rng):
    pts = rng.normal(size=(20, 2))
    g = knn_graph(Dataset(pts), n_neighbors=3, weight_policy="inverse_distance")
    for v in range(g.n_nodes):
        nbrs, w = g.neighbors(v)
        for u, weight in zip(nbrs.tolist(), w.tolist()):
            diff = pts[v] - pts[u]
            assert weight == pytest.approx(1.0 / (1.0 + np.sqrt((diff * diff).sum())))


def test_distance_ties_break_toward_lower_index():
    # four corners of a square: each point's two nearest are at equal
    # distance 2; with k=1 the lower-indexed neighbor must win
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])
    g = knn_graph(Dataset(pts), n_neighbors=1)
    nbrs0, _ = g.neighbors(0)
    assert 1 in nbrs0.tolist()  # 1 beats the equally-distant 2


def test_deterministic(rng):
    pts = rng.normal(size=(30, 4))
    a = knn_graph(Dataset(pts), n_neighbors=5)
    b = knn_graph(Dataset(pts), n_neighbors=5)
    np.testing.assert_array_equal(a.indptr, b.indptr)
    np.testing.assert_array_equal(a.indices, b.indices)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_strengths_match_row_sums(rng):
    g = knn_graph(Dataset(rng.normal(size=(25, 2))), n_neighbors=4)
    manual = np.array([g.neighbors(v)[1].sum() for v in range(g.n_nodes)])
    np.testing.assert_allclose(g.strengths, manual)


def test_validation_errors(rng):
    ds = Dataset(rng.normal(size=(5, 2)))
    with pytest.raises(ConfigError):
        knn_graph(ds, n_neighbors=5)  # needs n > k
    with pytest.raises(ConfigError):
        knn_graph(ds, n_neighbors=0)
    with pytest.raises(ConfigError):
        knn_graph(ds, n_neighbors=2, weight_policy="nope")
