"""Undirected graphs stored as CSR adjacency over dense integer ids.

Node tokens from edge-list files are arbitrary strings; internal ids are
assigned by first appearance so adjacency lookups in the training loop are
plain array indexing.  Graphs are immutable after construction and safe to
share across worker threads.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

COMMENT_PREFIXES = ("#", "%")


class Graph:
    """Immutable undirected graph: sorted CSR adjacency plus a token map.

    ``indptr``/``indices`` follow the usual CSR convention; every undirected
    edge appears in both endpoint rows, rows are sorted, and there are no
    self-loops or duplicates.
    """

    __slots__ = ("indptr", "indices", "tokens", "_token_ids")

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, tokens: Sequence[str]):
        self.indptr = indptr
        self.indices = indices
        self.tokens = list(tokens)
        self._token_ids = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self._token_ids) != len(self.tokens):
            raise DataError("node tokens are not unique")

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return int(self.indices.size) // 2

    @property
    def mean_degree(self) -> float:
        return self.indices.size / self.n

    def degree(self, v: int) -> int:
        self._check_node(v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of ``v`` (a read-only view, do not mutate)."""
        self._check_node(v)
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        k = int(np.searchsorted(row, v))
        return k < row.size and int(row[k]) == v

    def token_id(self, token: str) -> int:
        try:
            return self._token_ids[token]
        except KeyError:
            raise DataError(f"unknown node token {token!r}") from None

    def edges(self) -> np.ndarray:
        """All undirected edges as an (m, 2) array with u < v."""
        u = np.repeat(np.arange(self.n, dtype=np.int32), np.diff(self.indptr))
        v = self.indices
        keep = u < v
        return np.column_stack([u[keep], v[keep]])

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"node id {v} out of range [0, {self.n})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], tokens: Sequence[str]) -> "Graph":
        """Build from undirected edge pairs over ids 0..n-1 (self-loops and
        duplicates are dropped)."""
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            adj[u].add(v)
            adj[v].add(u)
        return cls._from_adjacency(adj, tokens)

    @classmethod
    def _from_adjacency(cls, adj: list[set[int]], tokens: Sequence[str]) -> "Graph":
        n = len(adj)
        degrees = np.fromiter((len(a) for a in adj), dtype=np.int64, count=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=np.int32)
        for v, nbrs in enumerate(adj):
            indices[indptr[v] : indptr[v + 1]] = sorted(nbrs)
        return cls(indptr, indices, tokens)


def load_edge_list(path, directed: bool = False) -> Graph:
    """Parse a whitespace-separated edge list into an undirected :class:`Graph`.

    Lines starting with '#' or '%' and blank lines are skipped; a third
    column (edge weight), if present, is ignored.  Self-loops and duplicate
    edges are dropped, and every edge is symmetrized regardless of the
    ``directed`` flag, which only acknowledges the source file convention
    (directed inputs may list both orientations; they collapse to one edge).
    """
    token_ids: dict[str, int] = {}
    tokens: list[str] = []
    pairs: list[tuple[int, int]] = []

    def intern(tok: str) -> int:
        if tok not in token_ids:
            token_ids[tok] = len(tokens)
            tokens.append(tok)
        return token_ids[tok]

    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read edge list {path}: {exc}") from exc

    with handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise DataError(f"{path}:{lineno}: malformed line {line!r}")
            u = intern(parts[0])
            v = intern(parts[1])
            if u != v:
                pairs.append((u, v))

    if not tokens:
        raise DataError(f"{path}: empty graph")
    return Graph.from_edges(len(tokens), pairs, tokens)


def connected_components(g: Graph) -> list[list[int]]:
    """Connected components as id lists, ordered by smallest member."""
    seen = np.zeros(g.n, dtype=bool)
    components = []
    for seed in range(g.n):
        if seen[seed]:
            continue
        queue = deque([seed])
        seen[seed] = True
        members = [seed]
        while queue:
            cur = queue.popleft()
            for nxt in g.neighbors(cur):
                nxt = int(nxt)
                if not seen[nxt]:
                    seen[nxt] = True
                    members.append(nxt)
                    queue.append(nxt)
        components.append(members)
    return components


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component with re-compacted ids.

    Ties between equal-sized components go to the one containing the
    smallest id; original tokens are preserved through the re-mapping.
    """
    if g.n == 0:
        raise DataError("empty graph")
    best: list[int] | None = None
    for comp in connected_components(g):
        if best is None or len(comp) > len(best):
            best = comp
    assert best is not None
    keep = sorted(best)
    remap = {old: new for new, old in enumerate(keep)}
    tokens = [g.tokens[old] for old in keep]
    edges = []
    for old_u in keep:
        u = remap[old_u]
        for old_v in g.neighbors(old_u):
            old_v = int(old_v)
            if old_u < old_v:
                edges.append((u, remap[old_v]))
    return Graph.from_edges(len(keep), edges, tokens)


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return False
    return len(max(connected_components(g), key=len)) == g.n


def write_edge_list(g: Graph, path) -> None:
    """Write one 'token_u token_v' line per undirected edge."""
    with open(path, "w", encoding="utf-8") as out:
        for u, v in g.edges():
            out.write(f"{g.tokens[int(u)]} {g.tokens[int(v)]}\n")


def write_nodemap(g: Graph, path) -> None:
    """Write the 'original_token internal_id' mapping of a (sub)graph."""
    with open(path, "w", encoding="utf-8") as out:
        for i, tok in enumerate(g.tokens):
            out.write(f"{tok} {i}\n")
