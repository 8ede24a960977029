"""Link-prediction edge splits and edge feature construction.

Test positives are removed uniformly at random while keeping the residual
graph connected: removing an edge whose endpoints become disconnected is
skipped, and (since deleting more edges never reconnects anything) skipped
edges stay skipped.  On sparse graphs the connectivity constraint can cap
the removable count below the requested fraction; the split records how
many edges actually came out.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..graph import Graph, is_connected


@dataclass
class EdgeSplit:
    """Residual training edges plus positive/negative test and train pairs.

    train_pos is the residual edge set itself; train_neg and test_neg are
    disjoint uniform samples of non-edges of the original graph, with
    |test_neg| = |test_pos| and |train_neg| = |train_pos|.
    """

    n: int
    residual_edges: np.ndarray  # (r, 2)
    test_pos: np.ndarray  # (s, 2)
    test_neg: np.ndarray  # (s, 2)
    train_neg: np.ndarray  # (r, 2)
    requested: int  # removal target floor(fraction * m)

    @property
    def train_pos(self) -> np.ndarray:
        return self.residual_edges

    @property
    def removed(self) -> int:
        return int(self.test_pos.shape[0])


def edge_features(x, y) -> np.ndarray:
    """Coordinate-wise squared difference |x_i - y_i|^2 (symmetric in x, y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    d = x - y
    return d * d


def _reachable_without(adj: list[set], u: int, v: int) -> bool:
    """BFS u -> v in the residual with edge (u, v) already removed."""
    if len(adj[u]) == 0 or len(adj[v]) == 0:
        return False
    seen = {u}
    queue = deque([u])
    while queue:
        cur = queue.popleft()
        for nxt in adj[cur]:
            if nxt == v:
                return True
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def _sample_non_edges(g: Graph, count: int, rng: np.random.Generator, taken: set) -> np.ndarray:
    """Uniform non-edges of the original graph, disjoint from ``taken``."""
    n = g.n
    max_pairs = n * (n - 1) // 2
    if max_pairs - g.m < count:
        raise DataError(f"graph too dense to sample {count} distinct non-edges")
    out = np.empty((count, 2), dtype=np.int32)
    got = 0
    while got < count:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        if u > v:
            u, v = v, u
        key = (u, v)
        if key in taken or g.has_edge(u, v):
            continue
        taken.add(key)
        out[got, 0] = u
        out[got, 1] = v
        got += 1
    return out


def split_edges(
    g: Graph,
    fraction: float = 0.5,
    seed: int = 1,
    enforce_connectivity: bool = True,
) -> EdgeSplit:
    """Remove ``fraction`` of the edges as test positives.

    The caller is expected to pass the largest connected component; a
    disconnected input is an error.  With ``enforce_connectivity`` (the
    default) bridges of the current residual are skipped, which may stop
    the removal early on sparse graphs (a warning reports the shortfall).
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if not is_connected(g):
        raise DataError("split_edges expects a connected graph (extract the LCC first)")

    rng = np.random.Generator(np.random.PCG64(seed))
    edges = g.edges()
    m = edges.shape[0]
    target = int(fraction * m)
    order = rng.permutation(m)

    adj = [set(map(int, g.neighbors(v))) for v in range(g.n)]
    removed: list[tuple[int, int]] = []
    for idx in order:
        if len(removed) >= target:
            break
        u, v = int(edges[idx, 0]), int(edges[idx, 1])
        adj[u].discard(v)
        adj[v].discard(u)
        if enforce_connectivity and not _reachable_without(adj, u, v):
            adj[u].add(v)
            adj[v].add(u)
            continue
        removed.append((u, v))
    if len(removed) < target:
        warnings.warn(
            f"only {len(removed)} of {target} requested edges were removable "
            "without disconnecting the residual graph",
            RuntimeWarning,
            stacklevel=2,
        )

    removed_set = set(removed)
    residual = np.array(
        [e for e in map(tuple, edges.tolist()) if e not in removed_set],
        dtype=np.int32,
    ).reshape(-1, 2)
    test_pos = np.array(removed, dtype=np.int32).reshape(-1, 2)

    taken: set = set()
    test_neg = _sample_non_edges(g, test_pos.shape[0], rng, taken)
    train_neg = _sample_non_edges(g, residual.shape[0], rng, taken)
    return EdgeSplit(
        n=g.n,
        residual_edges=residual,
        test_pos=test_pos,
        test_neg=test_neg,
        train_neg=train_neg,
        requested=target,
    )


def residual_graph(g: Graph, split: EdgeSplit) -> Graph:
    """Training graph after removal; keeps all nodes and original tokens."""
    return Graph.from_edges(g.n, map(tuple, split.residual_edges.tolist()), g.tokens)
