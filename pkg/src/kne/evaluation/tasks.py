"""End-to-end experiment protocols built from the library pieces.

Node classification: uniform random train/test splits of the labeled nodes
at each training ratio, one-vs-rest logistic regression on the exported
embedding rows, micro-F1 averaged over repeats.

Link prediction: largest component -> connectivity-preserving split ->
walks and training on the residual graph only -> logistic regression on
coordinate-wise squared-difference edge features -> AUC on held-out pairs.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..errors import DataError
from ..graph import Graph, largest_connected_component
from ..kernels import KernelSpec
from ..train import TrainConfig, train
from ..walks import WalkConfig, generate_walks
from .edgesplit import EdgeSplit, edge_features, residual_graph, split_edges
from .logreg import LabeledDataset, logreg_fit
from .metrics import auc, micro_f1

log = logging.getLogger(__name__)

DEFAULT_RATIOS = (0.02, 0.04, 0.06, 0.08, 0.10, 0.30, 0.50, 0.70, 0.90)


def load_labels(path) -> dict[str, str]:
    """Read 'node_token class_token' lines."""
    labels: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith(("#", "%")):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 'node_token class_token'")
                labels[parts[0]] = parts[1]
    except OSError as exc:
        raise DataError(f"cannot read labels {path}: {exc}") from exc
    if not labels:
        raise DataError(f"{path}: no labels found")
    return labels


@dataclass
class ClassificationResult:
    ratio: float
    mean: float
    std: float
    scores: np.ndarray

    @property
    def stderr(self) -> float:
        return float(self.std / np.sqrt(len(self.scores)))


def _encode_labels(g: Graph, node_labels: dict[str, str]):
    ids = []
    classes = sorted(set(node_labels.values()))
    class_id = {c: i for i, c in enumerate(classes)}
    y = []
    for token, cls in node_labels.items():
        ids.append(g.token_id(token))  # raises DataError for unknown nodes
        y.append(class_id[cls])
    return np.asarray(ids), np.asarray(y), classes


def _one_repeat(X, y, ratio, seed, lam, iters, tol):
    rng = np.random.Generator(np.random.PCG64(seed))
    m = X.shape[0]
    n_train = max(1, int(round(ratio * m)))
    if n_train >= m:
        n_train = m - 1
    perm = rng.permutation(m)
    tr, te = perm[:n_train], perm[n_train:]
    train_classes = np.unique(y[tr])
    if train_classes.size < 2:
        return None, train_classes  # degenerate draw; caller resamples/reports
    model = logreg_fit(LabeledDataset(X[tr], y[tr]), lam=lam, iters=iters, tol=tol)
    pred = model.predict(X[te])
    return micro_f1(pred, y[te]), train_classes


def run_classification(
    g: Graph,
    embeddings: np.ndarray,
    node_labels: dict[str, str],
    ratios=DEFAULT_RATIOS,
    repeats: int = 50,
    lam: float = 1.0,
    seed: int = 1,
    iters: int = 500,
    tol: float = 1e-6,
    workers: int = 1,
) -> list[ClassificationResult]:
    """Mean/std micro-F1 per training ratio over uniform random splits."""
    if embeddings.shape[0] != g.n:
        raise DataError(f"embeddings rows ({embeddings.shape[0]}) != graph nodes ({g.n})")
    ids, y, classes = _encode_labels(g, node_labels)
    X = np.asarray(embeddings, dtype=np.float64)[ids]
    results = []
    for r_idx, ratio in enumerate(ratios):
        if not (0.0 < ratio < 1.0):
            raise ValueError(f"training ratio must be in (0, 1), got {ratio}")
        repeat_seeds = [seed + 100_003 * r_idx + i for i in range(repeats)]

        def job(s):
            return _one_repeat(X, y, ratio, s, lam, iters, tol)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(job, repeat_seeds))
        else:
            outcomes = [job(s) for s in repeat_seeds]

        scores = np.array([s for s, _ in outcomes if s is not None])
        seen_union = set()
        for _, seen in outcomes:
            seen_union.update(int(c) for c in seen)
        missing = [classes[c] for c in range(len(classes)) if c not in seen_union]
        if missing:
            warnings.warn(
                f"ratio {ratio}: classes {missing} never appeared in any training split",
                RuntimeWarning,
                stacklevel=2,
            )
        if scores.size == 0:
            raise DataError(f"ratio {ratio}: every repeat drew a single-class training set")
        results.append(
            ClassificationResult(
                ratio=float(ratio),
                mean=float(scores.mean()),
                std=float(scores.std(ddof=0)),
                scores=scores,
            )
        )
        log.info("ratio %.2f: micro-F1 %.4f +/- %.4f (%d repeats)", ratio, results[-1].mean, results[-1].std, scores.size)
    return results


def link_prediction_auc(
    embeddings: np.ndarray,
    split: EdgeSplit,
    lam: float = 1.0,
    iters: int = 500,
    tol: float = 1e-6,
) -> float:
    """Fit the edge classifier on the split's train pairs and score the test pairs."""
    A = np.asarray(embeddings, dtype=np.float64)

    def features(pairs):
        return edge_features(A[pairs[:, 0]], A[pairs[:, 1]])

    X_train = np.vstack([features(split.train_pos), features(split.train_neg)])
    y_train = np.concatenate(
        [np.ones(split.train_pos.shape[0], dtype=int), np.zeros(split.train_neg.shape[0], dtype=int)]
    )
    model = logreg_fit(LabeledDataset(X_train, y_train), lam=lam, iters=iters, tol=tol)
    X_test = np.vstack([features(split.test_pos), features(split.test_neg)])
    y_test = np.concatenate(
        [np.ones(split.test_pos.shape[0], dtype=int), np.zeros(split.test_neg.shape[0], dtype=int)]
    )
    scores = model.decision_scores(X_test)[:, 1]
    return auc(scores, y_test)


@dataclass
class LinkPredictionResult:
    auc: float
    n_nodes: int
    n_test_pos: int
    requested_removals: int
    residual_edges: int
    epoch_losses: list[float]


def run_link_prediction(
    g: Graph,
    spec: KernelSpec,
    walk_cfg: WalkConfig,
    train_cfg: TrainConfig,
    fraction: float = 0.5,
    lam: float = 1.0,
    seed: int | None = None,
    enforce_connectivity: bool = True,
    impl=None,
) -> LinkPredictionResult:
    """Full protocol on the largest component; embeddings are learned on the
    residual network only.  ``seed`` (if given) overrides the split, walk,
    and training seeds together."""
    if seed is not None:
        walk_cfg = replace(walk_cfg, seed=seed)
        train_cfg = replace(train_cfg, seed=seed)
    split_seed = seed if seed is not None else walk_cfg.seed

    lcc = largest_connected_component(g)
    split = split_edges(lcc, fraction=fraction, seed=split_seed, enforce_connectivity=enforce_connectivity)
    if split.removed == 0:
        raise DataError("no edges could be removed; link prediction has no test set")
    residual = residual_graph(lcc, split)
    corpus = generate_walks(residual, walk_cfg)
    model = train(residual, corpus, train_cfg, spec, window=walk_cfg.window, impl=impl)
    score = link_prediction_auc(model.A, split, lam=lam)
    return LinkPredictionResult(
        auc=float(score),
        n_nodes=lcc.n,
        n_test_pos=split.removed,
        requested_removals=split.requested,
        residual_edges=int(split.residual_edges.shape[0]),
        epoch_losses=model.epoch_losses,
    )
