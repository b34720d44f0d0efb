"""Leiden community detection over a weighted kNN graph.

Quality is modularity with a resolution parameter:

    Q = Σ_c [ w_in(c)/m2 − γ (K_c/m2)² ]

where w_in(c) counts internal edge weight in both directions (plus
self-loop weight on aggregated nodes), K_c is the community's total
strength, and m2 the total strength of the graph.

Each pass runs the three Leiden phases — queue-based local moving with a
seeded random node order and random tie-breaking among equal-gain moves,
refinement inside the communities found, and graph aggregation over the
refined communities — descending through aggregation levels until they
stop changing.  Improving passes continue from the partition they
produced and count toward max_passes; a pass that fails to improve
quality is discarded and the next pass restarts from the all-singletons
partition to probe a different basin, stopping after stall_passes
consecutive failures.  Only improving passes are kept, so quality is
monotone across passes by construction.  A final split of any disconnected community (which can
only increase Q) makes the connectivity guarantee unconditional.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .errors import ConfigError
from .knn import KnnGraph
from .partition import Partition, compact_labels

_EPS = 1e-12
_THETA = 0.05  # refinement randomness temperature
# Consecutive non-improving passes tolerated before stopping.  Small graphs
# get a wide window: their quality landscape is rugged and restarts cost
# microseconds, whereas large graphs have smooth landscapes where restarts
# rarely pay for their runtime.
_STALL_PASSES_SMALL = 12
_STALL_PASSES_LARGE = 3
_SMALL_GRAPH_NODES = 256


@dataclass
class _Level:
    """One aggregation level: CSR adjacency (no self-loops) + per-node
    self-loop weight (internal weight of the collapsed subgraph)."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    self_w: np.ndarray
    strength: np.ndarray  # CSR row sums + self_w


def _level_from_graph(g: KnnGraph) -> _Level:
    owner = np.repeat(np.arange(g.n_nodes), np.diff(g.indptr))
    strength = np.bincount(owner, weights=g.weights, minlength=g.n_nodes)
    return _Level(
        n=g.n_nodes,
        indptr=g.indptr.astype(np.int64),
        indices=g.indices.astype(np.int64),
        weights=g.weights.astype(np.float64),
        self_w=np.zeros(g.n_nodes, dtype=np.float64),
        strength=strength,
    )


def _level_modularity(level: _Level, labels: np.ndarray, gamma: float, m2: float) -> float:
    internal = level.self_w.sum()
    same = labels[np.repeat(np.arange(level.n), np.diff(level.indptr))] == labels[level.indices]
    internal += level.weights[same].sum()
    k_comm = np.bincount(labels, weights=level.strength)
    return float(internal / m2 - gamma * ((k_comm / m2) ** 2).sum())


def modularity(
    g: KnnGraph, part: Union[Partition, np.ndarray], resolution: float = 1.0
) -> float:
    """Resolution-scaled modularity of a partition of g's nodes."""
    labels = part.labels if isinstance(part, Partition) else compact_labels(part)
    if labels.shape[0] != g.n_nodes:
        raise ConfigError(
            f"partition covers {labels.shape[0]} nodes, graph has {g.n_nodes}"
        )
    level = _level_from_graph(g)
    m2 = float(level.strength.sum())
    if m2 == 0.0:
        return 0.0
    return _level_modularity(level, labels, resolution, m2)


def _local_move(
    level: _Level,
    labels: np.ndarray,
    gamma: float,
    m2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Queue-based single-node moves until no move improves quality."""
    labels = labels.copy()
    k_comm = np.bincount(labels, weights=level.strength, minlength=level.n)
    k_comm = np.concatenate([k_comm, np.zeros(level.n, dtype=np.float64)])
    empty = deque(range(len(np.bincount(labels)), len(k_comm)))

    order = rng.permutation(level.n)
    queue = deque(order)
    queued = np.ones(level.n, dtype=bool)
    while queue:
        v = queue.popleft()
        queued[v] = False
        a = labels[v]
        kv = level.strength[v]
        lo, hi = level.indptr[v], level.indptr[v + 1]
        nbrs, wts = level.indices[lo:hi], level.weights[lo:hi]

        w_to: dict = {}
        for j, w in zip(nbrs.tolist(), wts.tolist()):
            c = labels[j]
            w_to[c] = w_to.get(c, 0.0) + w
        k_a_rest = k_comm[a] - kv
        stay = w_to.get(a, 0.0) - gamma * kv * k_a_rest / m2
        # candidates tied for the best gain; ties are broken at random so
        # every maximal-gain trajectory is reachable across seeds
        cands: list = []
        best_gain = 0.0
        for c, w in sorted(w_to.items()):
            if c == a:
                continue
            gain = (w - gamma * kv * k_comm[c] / m2) - stay
            if gain <= _EPS:
                continue
            if gain > best_gain + _EPS:
                best_gain, cands = gain, [c]
            elif gain >= best_gain - _EPS:
                cands.append(c)
        if empty and -stay > _EPS:  # moving out to a fresh singleton community
            if -stay > best_gain + _EPS:
                best_gain, cands = -stay, [empty[0]]
            elif -stay >= best_gain - _EPS:
                cands.append(empty[0])

        if cands:
            best_c = cands[0] if len(cands) == 1 else cands[int(rng.integers(len(cands)))]
            if empty and best_c == empty[0]:
                empty.popleft()
            labels[v] = best_c
            k_comm[a] -= kv
            k_comm[best_c] += kv
            if k_comm[a] <= 0.0 and a not in empty:
                empty.append(a)
            for j in nbrs:
                if labels[j] != best_c and not queued[j]:
                    queue.append(j)
                    queued[j] = True
    return compact_labels(labels)


def _refine(
    level: _Level,
    labels: np.ndarray,
    gamma: float,
    m2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Merge singleton nodes into well-connected refined communities
    inside each community of ``labels``.

    Merge targets are sampled with probability ∝ exp(ΔQ/θ) among the
    non-negative-gain candidates rather than greedily: the randomness is
    what lets later aggregation levels escape local optima by splitting a
    community along refined boundaries.
    """
    refined = np.arange(level.n, dtype=np.int64)
    k_ref = level.strength.copy()
    k_comm = np.bincount(labels, weights=level.strength)
    ref_size = np.ones(level.n, dtype=np.int64)

    # e(v, S∖v): edge weight from v to the rest of its community
    ext = np.zeros(level.n, dtype=np.float64)
    for v in range(level.n):
        lo, hi = level.indptr[v], level.indptr[v + 1]
        nbrs, wts = level.indices[lo:hi], level.weights[lo:hi]
        ext[v] = wts[labels[nbrs] == labels[v]].sum()
    ext_ref = ext.copy()

    for v in rng.permutation(level.n):
        if ref_size[refined[v]] != 1:
            continue
        s = labels[v]
        kv = level.strength[v]
        k_s = k_comm[s]
        if ext[v] < gamma * kv * (k_s - kv) / m2 - _EPS:
            continue  # v itself not well-connected within its community
        lo, hi = level.indptr[v], level.indptr[v + 1]
        nbrs, wts = level.indices[lo:hi], level.weights[lo:hi]
        w_to: dict = {}
        for j, w in zip(nbrs.tolist(), wts.tolist()):
            if labels[j] == s and refined[j] != refined[v]:
                r = refined[j]
                w_to[r] = w_to.get(r, 0.0) + w
        targets = []
        gains = []
        for r, w in sorted(w_to.items()):
            if ext_ref[r] < gamma * k_ref[r] * (k_s - k_ref[r]) / m2 - _EPS:
                continue  # target refined community not well-connected
            gain = w - gamma * kv * k_ref[r] / m2
            if gain < -_EPS:
                continue
            targets.append(r)
            gains.append(gain)
        if targets:
            g = np.asarray(gains, dtype=np.float64)
            p = np.exp((g - g.max()) / _THETA)
            best_r = int(targets[int(rng.choice(len(targets), p=p / p.sum()))])
            old = refined[v]
            w_vr = w_to[best_r]
            refined[v] = best_r
            ref_size[best_r] += 1
            ref_size[old] -= 1
            k_ref[best_r] += kv
            ext_ref[best_r] += ext_ref[old] - 2.0 * w_vr
            k_ref[old] = 0.0
            ext_ref[old] = 0.0
    return compact_labels(refined)


def _aggregate(
    level: _Level, refined: np.ndarray, labels: np.ndarray
) -> Tuple[_Level, np.ndarray]:
    """Collapse refined communities into nodes; initial community of each
    new node is its members' (common) community under ``labels``."""
    n_new = int(refined.max()) + 1
    owner = np.repeat(np.arange(level.n), np.diff(level.indptr))
    a = refined[owner]
    b = refined[level.indices]
    self_w = np.bincount(refined, weights=level.self_w, minlength=n_new)
    internal = a == b
    self_w += np.bincount(a[internal], weights=level.weights[internal], minlength=n_new)

    ext_a, ext_b, ext_w = a[~internal], b[~internal], level.weights[~internal]
    key = ext_a * n_new + ext_b
    uniq, inverse = np.unique(key, return_inverse=True)
    agg_w = np.bincount(inverse, weights=ext_w)
    rows = (uniq // n_new).astype(np.int64)
    cols = (uniq % n_new).astype(np.int64)

    order = np.lexsort((cols, rows))
    rows, cols, agg_w = rows[order], cols[order], agg_w[order]
    indptr = np.zeros(n_new + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    strength = np.bincount(rows, weights=agg_w, minlength=n_new) + self_w

    first_member = np.full(n_new, -1, dtype=np.int64)
    for v in range(level.n):
        if first_member[refined[v]] < 0:
            first_member[refined[v]] = v
    init = labels[first_member]

    new_level = _Level(
        n=n_new,
        indptr=indptr,
        indices=cols,
        weights=agg_w,
        self_w=self_w,
        strength=strength,
    )
    return new_level, init


def _split_disconnected(g: KnnGraph, labels: np.ndarray) -> np.ndarray:
    """Give each connected component of each community its own label."""
    labels = labels.copy()
    n = labels.shape[0]
    seen = np.zeros(n, dtype=bool)
    next_label = int(labels.max()) + 1
    for start in range(n):
        if seen[start]:
            continue
        comm = labels[start]
        stack = [start]
        seen[start] = True
        members = [start]
        while stack:
            v = stack.pop()
            lo, hi = g.indptr[v], g.indptr[v + 1]
            for j in g.indices[lo:hi]:
                if not seen[j] and labels[j] == comm:
                    seen[j] = True
                    stack.append(int(j))
                    members.append(int(j))
        if members[0] != int(np.flatnonzero(labels == comm)[0]):
            for v in members:
                labels[v] = next_label
            next_label += 1
    return compact_labels(labels)


def leiden(
    g: KnnGraph,
    resolution: float = 1.0,
    seed: int = 0,
    max_passes: int = 10,
    stall_passes: Union[int, None] = None,
    return_history: bool = False,
):
    """Partition g's nodes by modularity maximization (Leiden scheme).

    ``max_passes`` bounds the number of improving passes kept;
    ``stall_passes`` bounds consecutive non-improving passes (each retried
    from the all-singletons partition) before giving up.  Left at None it
    widens automatically on small graphs, where restarts are cheap and the
    quality landscape is rugged.

    Returns a Partition, or (Partition, per-pass quality list) when
    ``return_history`` is set.  Quality never decreases across passes, and
    every returned community induces a connected subgraph.  A graph with
    no edges yields the all-singletons partition with a warning.
    """
    if g.n_nodes < 1:
        raise ConfigError("graph has no nodes")
    if not resolution > 0:
        raise ConfigError(f"resolution must be positive, got {resolution}")
    if stall_passes is None:
        stall_passes = (
            _STALL_PASSES_SMALL if g.n_nodes <= _SMALL_GRAPH_NODES else _STALL_PASSES_LARGE
        )
    if stall_passes < 1:
        raise ConfigError(f"stall_passes must be >= 1, got {stall_passes}")
    if g.indices.shape[0] == 0:
        warnings.warn("leiden: graph has no edges; every node is its own community")
        part = Partition(np.arange(g.n_nodes))
        return (part, [0.0]) if return_history else part

    rng = np.random.default_rng(seed)
    level0 = _level_from_graph(g)
    m2 = float(level0.strength.sum())
    singletons = np.arange(g.n_nodes, dtype=np.int64)
    labels = singletons
    q_best = _level_modularity(level0, labels, resolution, m2)
    history: List[float] = []
    improving = 0
    stalled = 0
    start = labels
    while improving < max_passes and stalled < stall_passes:
        new_labels = _one_pass(level0, start, resolution, m2, rng)
        q = _level_modularity(level0, new_labels, resolution, m2)
        if q > q_best + _EPS:  # keep only improving passes: Q is monotone
            labels = new_labels
            q_best = q
            improving += 1
            stalled = 0
            start = labels  # continue refining the new best partition
        else:
            stalled += 1
            start = singletons  # restart from scratch to escape the basin
        history.append(q_best)
    labels = _split_disconnected(g, labels)
    part = Partition(labels)
    if return_history:
        return part, history
    return part


def _one_pass(
    level0: _Level,
    flat_labels: np.ndarray,
    gamma: float,
    m2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Local moving + refinement + aggregation, descending levels until
    aggregation stops shrinking the graph; returns flat labels."""
    level = level0
    node_map = np.arange(level0.n, dtype=np.int64)  # original node -> level node
    labels = compact_labels(flat_labels)
    while True:
        labels = _local_move(level, labels, gamma, m2, rng)
        refined = _refine(level, labels, gamma, m2, rng)
        n_refined = int(refined.max()) + 1
        if n_refined == level.n:
            break
        level, labels = _aggregate(level, refined, labels)
        node_map = refined[node_map]
    return labels[node_map]
