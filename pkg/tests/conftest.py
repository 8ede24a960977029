"""Shared fixtures and synthetic-graph builders for the test suite."""

from __future__ import annotations

import itertools
import os
from pathlib import Path

import numpy as np
import pytest

from kne.graph import Graph, largest_connected_component

DATA_DIR = Path(os.environ.get("KNE_DATA", Path(__file__).resolve().parent.parent / "data"))

DATASETS = {
    "citeseer": {"edges": "citeseer.edges", "labels": "citeseer.labels"},
    "cora": {"edges": "cora.edges", "labels": "cora.labels"},
}


def dataset_path(name: str, kind: str = "edges") -> Path:
    return DATA_DIR / DATASETS[name][kind]


def require_dataset(name: str, labels: bool = False) -> dict[str, Path]:
    """Resolve dataset files or skip with fetch instructions."""
    paths = {"edges": dataset_path(name, "edges")}
    if labels:
        paths["labels"] = dataset_path(name, "labels")
    missing = [str(p) for p in paths.values() if not p.exists()]
    if missing:
        pytest.skip(
            f"dataset '{name}' not present ({missing[0]}); "
            "run scripts/fetch_datasets.py on a networked machine "
            "or point KNE_DATA at the prepared files"
        )
    return paths


def tokens(n: int) -> list[str]:
    return [str(i) for i in range(n)]


def make_graph(n: int, edges) -> Graph:
    return Graph.from_edges(n, edges, tokens(n))


def triangle_graph() -> Graph:
    return make_graph(3, [(0, 1), (1, 2), (2, 0)])


def path_graph(n: int) -> Graph:
    return make_graph(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> Graph:
    return make_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def two_cliques(k: int) -> Graph:
    """Two disconnected k-cliques: nodes 0..k-1 and k..2k-1."""
    edges = [(u, v) for u, v in itertools.combinations(range(k), 2)]
    edges += [(u + k, v + k) for u, v in itertools.combinations(range(k), 2)]
    return make_graph(2 * k, edges)


def er_graph(n: int, p: float, seed: int = 0, connected: bool = False) -> Graph:
    """Erdos-Renyi G(n, p); optionally reduced to its largest component."""
    rng = np.random.Generator(np.random.PCG64(seed))
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < p
    g = make_graph(n, list(zip(iu[mask].tolist(), ju[mask].tolist())))
    if connected:
        g = largest_connected_component(g)
    return g


def sbm_graph(block_sizes, p_in: float, p_out: float, seed: int = 0):
    """Stochastic block model; returns (graph, block label per node)."""
    n = int(sum(block_sizes))
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)
    rng = np.random.Generator(np.random.PCG64(seed))
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, p_in, p_out)
    mask = rng.random(iu.size) < prob
    g = make_graph(n, list(zip(iu[mask].tolist(), ju[mask].tolist())))
    return g, labels


@pytest.fixture
def triangle() -> Graph:
    return triangle_graph()


@pytest.fixture
def toy_graph() -> Graph:
    """Two triangles joined by an edge plus a pendant node (n=7, connected)."""
    return make_graph(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3), (5, 6)])


def write_edge_file(path: Path, lines) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
