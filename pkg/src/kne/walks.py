"""Second-order biased random-walk corpora and (center, context) statistics.

Walks follow the biased transition rule: stepping from ``v`` after arriving
via edge (t -> v), a candidate x in adj(v) gets weight 1/p if x == t, 1 if
x is a neighbor of t, and 1/q otherwise.  With p = q = 1 every step reduces
to a uniform neighbor choice and no per-edge tables are built.

Generation is deterministic for a fixed seed regardless of worker count:
each pass over the start nodes owns an RNG stream derived from the master
seed, and pass i writes rows [i*n, (i+1)*n) of the corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import backend
from .alias import AliasTable
from .errors import DataError
from .graph import Graph

PAD = -1


@dataclass
class WalkConfig:
    walks_per_node: int = 80
    walk_length: int = 10
    p: float = 1.0
    q: float = 1.0
    window: int = 10
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be >= 1")
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")
        if not (self.p > 0 and self.q > 0):
            raise ValueError("p and q must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def is_first_order(self) -> bool:
        return self.p == 1.0 and self.q == 1.0


@dataclass
class WalkCorpus:
    """Fixed-width walk matrix padded with -1 beyond each walk's length.

    Walks from isolated nodes are degenerate (length 1) and contribute no
    context pairs.
    """

    walks: np.ndarray  # int32 (n_walks, walk_length)
    lengths: np.ndarray  # int32 (n_walks,)
    n: int  # node count of the source graph

    @property
    def n_walks(self) -> int:
        return int(self.walks.shape[0])

    @property
    def walk_length(self) -> int:
        return int(self.walks.shape[1])

    def __iter__(self) -> Iterator[np.ndarray]:
        for i in range(self.n_walks):
            yield self.walks[i, : self.lengths[i]]

    @property
    def total_positions(self) -> int:
        return int(self.lengths.sum())


def _second_order_tables(g: Graph, p: float, q: float):
    """Flattened per-directed-edge alias tables.

    The table for walk state (prev=t, cur=v) is stored at the CSR slot of
    edge (v -> t); offsets index the flattened probability/alias arrays.
    Memory is sum(deg(v)^2), so this is only built when p != 1 or q != 1.
    """
    indptr, indices = g.indptr, g.indices
    degrees = np.diff(indptr)
    sizes = np.repeat(degrees, degrees)  # table size per CSR slot
    offsets = np.zeros(indices.size + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    prob = np.empty(int(offsets[-1]), dtype=np.float64)
    alias = np.empty(int(offsets[-1]), dtype=np.int32)
    for v in range(g.n):
        nbrs_v = indices[indptr[v] : indptr[v + 1]]
        for j in range(int(indptr[v]), int(indptr[v + 1])):
            t = int(indices[j])
            nbrs_t = indices[indptr[t] : indptr[t + 1]]
            w = np.where(np.isin(nbrs_v, nbrs_t), 1.0, 1.0 / q)
            w[nbrs_v == t] = 1.0 / p
            table = AliasTable.from_weights(w)
            prob[offsets[j] : offsets[j + 1]] = table.prob
            alias[offsets[j] : offsets[j + 1]] = table.alias
    return prob, alias, offsets


def generate_walks(g: Graph, cfg: WalkConfig) -> WalkCorpus:
    """Generate ``walks_per_node`` walks from every node of ``g``."""
    if g.n == 0:
        raise DataError("cannot generate walks on an empty graph")
    tables = None if cfg.is_first_order else _second_order_tables(g, cfg.p, cfg.q)
    n_walks = g.n * cfg.walks_per_node
    walks = np.full((n_walks, cfg.walk_length), PAD, dtype=np.int32)
    lengths = np.zeros(n_walks, dtype=np.int32)
    backend.generate_walk_arrays(
        g.indptr,
        g.indices,
        walks,
        lengths,
        walks_per_node=cfg.walks_per_node,
        walk_length=cfg.walk_length,
        p=cfg.p,
        q=cfg.q,
        seed=cfg.seed,
        workers=cfg.workers,
        tables=tables,
    )
    return WalkCorpus(walks=walks, lengths=lengths, n=g.n)


def context_pairs(corpus: WalkCorpus, window: int) -> Iterator[tuple[int, int]]:
    """Stream (center, context) pairs, walk-major then position-major.

    The window is clipped at walk boundaries; for position l every k in
    [l - window, l + window], k != l, inside the walk is emitted in
    ascending order.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    walks, lengths = corpus.walks, corpus.lengths
    for i in range(corpus.n_walks):
        length = int(lengths[i])
        row = walks[i]
        for l in range(length):
            lo = max(0, l - window)
            hi = min(length - 1, l + window)
            center = int(row[l])
            for k in range(lo, hi + 1):
                if k != l:
                    yield center, int(row[k])


def count_context_pairs(corpus: WalkCorpus, window: int) -> int:
    """Closed-form number of pairs ``context_pairs`` will emit."""
    lengths = corpus.lengths.astype(np.int64)
    total = 0
    for length in np.unique(lengths):
        count = int((lengths == length).sum())
        ls = np.arange(length)
        per_walk = int(np.sum(np.minimum(ls + window, length - 1) - np.maximum(ls - window, 0)))
        total += count * per_walk
    return total


def occurrence_frequencies(corpus: WalkCorpus, window: int) -> np.ndarray:
    """Per-node context-occurrence totals (how often each node appears in
    any center's window), used as the negative-sampling noise counts.

    A node at position k of a walk of length L is in the context of
    min(k + window, L - 1) - max(k - window, 0) centers, so the totals come
    from one weighted bincount instead of materializing the pair stream.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    walks, lengths = corpus.walks, corpus.lengths
    ks = np.arange(corpus.walk_length, dtype=np.int64)[None, :]
    L = lengths.astype(np.int64)[:, None]
    coverage = np.minimum(ks + window, L - 1) - np.maximum(ks - window, 0)
    valid = ks < L
    counts = np.bincount(
        walks[valid].astype(np.int64),
        weights=coverage[valid].astype(np.float64),
        minlength=corpus.n,
    )
    return np.rint(counts).astype(np.int64)


def save_corpus(corpus: WalkCorpus, g: Graph, path) -> None:
    """One walk per line, space-separated original node tokens."""
    tokens = g.tokens
    with open(path, "w", encoding="utf-8") as out:
        for walk in corpus:
            out.write(" ".join(tokens[int(v)] for v in walk))
            out.write("\n")


def _rows_to_corpus(rows: list[list[int]], n: int) -> WalkCorpus:
    width = max(len(r) for r in rows)
    walks = np.full((len(rows), width), PAD, dtype=np.int32)
    lengths = np.zeros(len(rows), dtype=np.int32)
    for i, row in enumerate(rows):
        walks[i, : len(row)] = row
        lengths[i] = len(row)
    return WalkCorpus(walks=walks, lengths=lengths, n=n)


def load_corpus(path, g: Graph) -> WalkCorpus:
    """Read a walk file written by :func:`save_corpus` (tokens must exist in g)."""
    rows: list[list[int]] = []
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    rows.append([g.token_id(tok) for tok in line.split()])
                except DataError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from None
    except OSError as exc:
        raise DataError(f"cannot read walk corpus {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty walk corpus")
    return _rows_to_corpus(rows, g.n)


def load_corpus_standalone(path) -> tuple[WalkCorpus, list[str]]:
    """Read a walk file without a graph; ids are assigned by first appearance."""
    token_ids: dict[str, int] = {}
    tokens: list[str] = []
    rows: list[list[int]] = []
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for raw in handle:
                line = raw.strip()
                if not line:
                    continue
                row = []
                for tok in line.split():
                    if tok not in token_ids:
                        token_ids[tok] = len(tokens)
                        tokens.append(tok)
                    row.append(token_ids[tok])
                rows.append(row)
    except OSError as exc:
        raise DataError(f"cannot read walk corpus {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty walk corpus")
    return _rows_to_corpus(rows, len(tokens)), tokens
