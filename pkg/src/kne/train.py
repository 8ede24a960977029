"""Negative-sampling SGD on the kernelized factorization objective.

Each (center v, context u+) pair from the walk stream contributes the
sampled loss (1 - k(A_v, B_u+))^2 plus (k(A_v, B_u-))^2 for each of the k
noise nodes drawn proportionally to context-frequency^0.75.  A holds the
center embeddings and is the exported representation; B holds context
embeddings.  Full matrices of the underlying objective are never formed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .alias import AliasTable
from .errors import DataError, NumericalError
from .graph import Graph
from .kernels import KernelSpec, grad_coefficient, kernel_eval, kernel_from_sqdist
from .rng import Xoshiro256StarStar
from .walks import WalkCorpus, occurrence_frequencies

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    dim: int = 128
    negatives: int = 5
    lr0: float = 0.025
    lr_min: float | None = None  # resolved to lr0 * 1e-4
    epochs: int = 1
    noise_exponent: float = 0.75
    seed: int = 1
    workers: int = 1
    deterministic: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.negatives < 0:
            raise ValueError("negatives must be >= 0")
        if self.lr_min is None:
            self.lr_min = self.lr0 * 1e-4
        if not (self.lr0 > self.lr_min > 0):
            raise ValueError("need lr0 > lr_min > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.deterministic and self.workers != 1:
            raise ValueError("deterministic mode requires workers=1")


@dataclass
class EmbeddingModel:
    """Center (A) and context (B) embedding matrices plus the kernel used."""

    A: np.ndarray
    B: np.ndarray
    spec: KernelSpec
    tokens: list[str] | None = None
    epoch_losses: list[float] = field(default_factory=list)
    loss_trace: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @property
    def d(self) -> int:
        return int(self.A.shape[1])

    def similarity(self, v: int, u: int) -> float:
        """Kernel similarity between the exported embeddings of two nodes."""
        return float(kernel_eval(self.spec, self.A[v], self.A[u]))


def init_model(n: int, cfg: TrainConfig, spec: KernelSpec) -> EmbeddingModel:
    """Uniform init on [-0.5/d, 0.5/d]; keeps initial distances small so
    kernels start far from saturation."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    bound = 0.5 / cfg.dim
    A = rng.uniform(-bound, bound, size=(n, cfg.dim))
    B = rng.uniform(-bound, bound, size=(n, cfg.dim))
    return EmbeddingModel(A=A, B=B, spec=spec)


def pair_loss(model: EmbeddingModel, v: int, u: int, positive: bool) -> float:
    """Sampled loss of one (center, context-or-noise) pair, in [0, 1]."""
    k = kernel_eval(model.spec, model.A[v], model.B[u])
    return float((1.0 - k) ** 2 if positive else k**2)


class NegativeSampler:
    """Noise distribution proportional to context-frequency^exponent."""

    def __init__(self, counts, exponent: float = 0.75):
        counts = np.asarray(counts, dtype=np.float64)
        if counts.ndim != 1 or counts.size == 0:
            raise DataError("need a 1-D vector of per-node counts")
        if not np.any(counts > 0):
            raise DataError("all-zero frequencies: no context occurrences to sample from")
        self.weights = counts**exponent
        self.table = AliasTable.from_weights(self.weights)

    def draw(self, rng: Xoshiro256StarStar, k: int) -> list[int]:
        return [self.table.sample(rng) for _ in range(k)]


def draw_negatives(freq, k: int, rng: Xoshiro256StarStar, exponent: float = 0.75) -> list[int]:
    """One-shot convenience around :class:`NegativeSampler`."""
    return NegativeSampler(freq, exponent).draw(rng, k)


def sgd_step(model: EmbeddingModel, v: int, u_pos: int, negatives, lr: float) -> float:
    """One in-place SGD step on a positive pair and its sampled negatives.

    All gradients are evaluated at the current parameters before any update
    is applied, so the applied step equals -lr times the exact gradient of
    the summed pair loss.  Returns that loss (pre-update).
    """
    if lr <= 0:
        raise ValueError("lr must be positive")
    A, B, spec = model.A, model.B, model.spec
    rows = [int(u_pos)] + [int(u) for u in negatives]
    diffs = np.empty((len(rows), model.d), dtype=np.float64)
    coefs = np.empty(len(rows), dtype=np.float64)
    loss = 0.0
    av = A[v]
    for t, u in enumerate(rows):
        diff = av - B[u]
        r = float(diff @ diff)
        k = float(kernel_from_sqdist(spec, r))
        c = float(grad_coefficient(spec, r, k))
        if t == 0:
            loss += (1.0 - k) ** 2
            coefs[t] = lr * 2.0 * (1.0 - k) * c
        else:
            loss += k**2
            coefs[t] = -lr * 2.0 * k * c
        diffs[t] = diff
    if not np.all(np.isfinite(coefs)):
        raise NumericalError(
            f"non-finite gradient for pair (v={v}, u={u_pos}) with {spec.describe()}; "
            "check kernel parameter and learning rate"
        )
    av += coefs @ diffs
    for t, u in enumerate(rows):
        B[u] -= coefs[t] * diffs[t]
    return loss


def train(
    g: Graph,
    corpus: WalkCorpus,
    cfg: TrainConfig,
    spec: KernelSpec,
    window: int = 10,
    bucket_size: int = 100_000,
    impl=None,
) -> EmbeddingModel:
    """Train embeddings over the corpus pair stream; returns the final model.

    The pair stream is consumed in corpus order (deterministic, one worker)
    or sharded across hogwild workers.  The learning rate decays linearly
    with processed center positions from lr0 to lr_min across all epochs.
    """
    if corpus.n != g.n:
        raise DataError(f"corpus was generated for n={corpus.n}, graph has n={g.n}")
    return train_corpus(corpus, cfg, spec, window=window, tokens=list(g.tokens),
                        bucket_size=bucket_size, impl=impl)


def train_corpus(
    corpus: WalkCorpus,
    cfg: TrainConfig,
    spec: KernelSpec,
    window: int = 10,
    tokens: list[str] | None = None,
    bucket_size: int = 100_000,
    impl=None,
) -> EmbeddingModel:
    """Train from a walk corpus alone (adjacency is never needed here)."""
    counts = occurrence_frequencies(corpus, window)
    sampler = NegativeSampler(counts, cfg.noise_exponent)
    model = init_model(corpus.n, cfg, spec)
    total_positions = corpus.total_positions * cfg.epochs

    stats = backend.run_training(
        model.A,
        model.B,
        corpus.walks,
        corpus.lengths,
        window=window,
        negatives=cfg.negatives,
        noise_prob=sampler.table.prob,
        noise_alias=sampler.table.alias,
        kernel_id=spec.kernel_id,
        kernel_param=spec.param,
        lr0=cfg.lr0,
        lr_min=cfg.lr_min,
        total_positions=total_positions,
        epochs=cfg.epochs,
        seed=cfg.seed,
        workers=1 if cfg.deterministic else cfg.workers,
        bucket_size=bucket_size,
        impl=impl,
    )
    if not (np.all(np.isfinite(model.A)) and np.all(np.isfinite(model.B))):
        raise NumericalError(
            f"non-finite embeddings after training with {spec.describe()}; "
            "check kernel parameter and learning rate"
        )
    model.tokens = tokens
    model.epoch_losses = [float(x) for x in stats.epoch_losses]
    model.loss_trace = stats.bucket_losses
    for i, loss in enumerate(model.epoch_losses):
        log.info("epoch %d/%d: mean sampled loss %.6f", i + 1, cfg.epochs, loss)
    return model


def export_embeddings(model: EmbeddingModel, path) -> None:
    """word2vec text format: header 'n d', then 'token v_1 ... v_d' rows
    with 9-significant-digit values."""
    tokens = model.tokens if model.tokens is not None else [str(i) for i in range(model.n)]
    with open(path, "w", encoding="utf-8") as out:
        out.write(f"{model.n} {model.d}\n")
        for i in range(model.n):
            row = " ".join(f"{x:.9g}" for x in model.A[i])
            out.write(f"{tokens[i]} {row}\n")


def import_embeddings(path) -> tuple[np.ndarray, list[str]]:
    """Read the text format back; returns (n x d matrix, token list)."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            header = handle.readline().split()
            if len(header) != 2:
                raise DataError(f"{path}: malformed header {header!r}, expected 'n d'")
            try:
                n, d = int(header[0]), int(header[1])
            except ValueError:
                raise DataError(f"{path}: malformed header {header!r}, expected 'n d'") from None
            matrix = np.empty((n, d), dtype=np.float64)
            tokens: list[str] = []
            for i in range(n):
                parts = handle.readline().split()
                if len(parts) != d + 1:
                    raise DataError(f"{path}: row {i} has {len(parts) - 1} values, expected {d}")
                tokens.append(parts[0])
                matrix[i] = [float(x) for x in parts[1:]]
    except OSError as exc:
        raise DataError(f"cannot read embeddings {path}: {exc}") from exc
    return matrix, tokens
