"""Backend selection: compiled extension when available, pure Python otherwise.

The compiled module is preferred automatically; set ``KNE_BACKEND=python`` to
force the fallback or ``KNE_BACKEND=compiled`` to fail loudly if the
extension is missing.  Both backends expose the same shard-level functions;
this module owns worker fan-out and result aggregation.
"""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import dataclass

import numpy as np

from . import _reference
from .errors import NumericalError

log = logging.getLogger(__name__)

try:
    from . import _speedups
except ImportError:  # extension not built
    _speedups = None

_FORCED = os.environ.get("KNE_BACKEND", "").strip().lower() or None
if _FORCED not in (None, "python", "compiled"):
    raise ValueError(f"KNE_BACKEND must be 'python' or 'compiled', got {_FORCED!r}")
if _FORCED == "compiled" and _speedups is None:
    raise ImportError("KNE_BACKEND=compiled but the kne._speedups extension is not built")

_ACTIVE = _reference if (_FORCED == "python" or _speedups is None) else _speedups

BACKEND = "compiled" if _ACTIVE is not _reference else "python"
HAVE_COMPILED = _speedups is not None

_EMPTY_PROB = np.empty(0, dtype=np.float64)
_EMPTY_ALIAS = np.empty(0, dtype=np.int32)
_EMPTY_OFFSETS = np.zeros(1, dtype=np.int64)


def backend_module(name: str | None = None):
    """Resolve a backend module by name ('compiled', 'python', or active)."""
    if name is None:
        return _ACTIVE
    if name == "python":
        return _reference
    if name == "compiled":
        if _speedups is None:
            raise ImportError("compiled backend is not built")
        return _speedups
    raise ValueError(f"unknown backend {name!r}")


def rng_u64_sequence(seed: int, count: int, impl=None) -> np.ndarray:
    return backend_module(impl).rng_u64_sequence(seed, count)


def alias_draws(prob, alias, seed: int, size: int, stream: int = 0, impl=None) -> np.ndarray:
    return backend_module(impl).alias_draws(
        np.ascontiguousarray(prob, dtype=np.float64),
        np.ascontiguousarray(alias, dtype=np.int32),
        seed,
        size,
        stream,
    )


def _pass_chunks(total: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, total))
    bounds = np.linspace(0, total, workers + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def generate_walk_arrays(
    indptr,
    indices,
    out_walks,
    out_lengths,
    *,
    walks_per_node: int,
    walk_length: int,
    p: float,
    q: float,
    seed: int,
    workers: int,
    tables=None,
    impl=None,
) -> None:
    """Fill the corpus arrays; output is a pure function of (seed, config)."""
    mod = backend_module(impl)
    first_order = tables is None
    if first_order:
        tprob, talias, toff = _EMPTY_PROB, _EMPTY_ALIAS, _EMPTY_OFFSETS
    else:
        tprob, talias, toff = tables
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int32),
        out_walks,
        out_lengths,
    )
    chunks = _pass_chunks(walks_per_node, workers)
    if mod is _reference or len(chunks) == 1:
        for lo, hi in chunks:
            mod.walk_pass_range(*args, lo, hi, walk_length, seed, first_order, tprob, talias, toff)
        return
    threads = [
        threading.Thread(
            target=mod.walk_pass_range,
            args=(*args, lo, hi, walk_length, seed, first_order, tprob, talias, toff),
        )
        for lo, hi in chunks
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


@dataclass
class TrainStats:
    epoch_losses: np.ndarray  # mean sampled loss per epoch
    bucket_losses: np.ndarray  # mean sampled loss per bucket of pairs (worker 0 stream)
    pairs_processed: int


def run_training(
    A,
    B,
    walks,
    lengths,
    *,
    window: int,
    negatives: int,
    noise_prob,
    noise_alias,
    kernel_id: int,
    kernel_param: float,
    lr0: float,
    lr_min: float,
    total_positions: int,
    epochs: int,
    seed: int,
    workers: int,
    bucket_size: int = 100_000,
    impl=None,
) -> TrainStats:
    """Run hogwild-style training shards over the walk corpus (in place).

    With one worker the pair stream is consumed in corpus order and the
    result is deterministic; with several workers updates are applied to the
    shared matrices without synchronization.
    """
    mod = backend_module(impl)
    n_walks = int(walks.shape[0])
    workers = max(1, min(workers, n_walks))
    if mod is _reference and workers > 1:
        log.warning("python backend trains single-threaded; ignoring workers=%d", workers)
        workers = 1

    max_pairs = int(lengths.astype(np.int64).sum()) * 2 * window * epochs
    n_buckets = max(1, -(-max_pairs // bucket_size))
    bucket_sums = np.zeros(n_buckets, dtype=np.float64)
    bucket_counts = np.zeros(n_buckets, dtype=np.int64)
    shared_counter = np.zeros(1, dtype=np.int64)
    abort_flag = np.zeros(1, dtype=np.int32)

    bounds = np.linspace(0, n_walks, workers + 1).astype(int)
    shards = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    stats = [np.zeros((epochs, 2), dtype=np.float64) for _ in shards]

    noise_prob = np.ascontiguousarray(noise_prob, dtype=np.float64)
    noise_alias = np.ascontiguousarray(noise_alias, dtype=np.int32)

    def shard_args(i):
        lo, hi = shards[i]
        return (
            A,
            B,
            walks,
            lengths,
            lo,
            hi,
            window,
            negatives,
            noise_prob,
            noise_alias,
            kernel_id,
            kernel_param,
            lr0,
            lr_min,
            total_positions,
            epochs,
            seed,
            i,
            shared_counter,
            bucket_sums,
            bucket_counts,
            bucket_size,
            i == 0,
            stats[i],
            abort_flag,
        )

    if len(shards) == 1:
        mod.train_shard(*shard_args(0))
    else:
        threads = [threading.Thread(target=mod.train_shard, args=shard_args(i)) for i in range(len(shards))]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

    if abort_flag[0]:
        raise NumericalError(
            "training aborted: non-finite loss detected "
            f"(kernel_id={kernel_id}, param={kernel_param}, lr0={lr0})"
        )

    agg = np.sum(stats, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        epoch_losses = np.where(agg[:, 1] > 0, agg[:, 0] / np.maximum(agg[:, 1], 1), np.nan)
    used = bucket_counts > 0
    bucket_losses = bucket_sums[used] / bucket_counts[used]
    return TrainStats(
        epoch_losses=epoch_losses,
        bucket_losses=bucket_losses,
        pairs_processed=int(agg[:, 1].sum()),
    )
