"""Pure-Python/NumPy fallback for the hot loops in ``_speedups``.

Function signatures and RNG consumption order mirror the compiled module
exactly, so walk corpora are bit-identical across backends and training is
deterministic within a backend.  Floating-point update order differs from
the C loop (NumPy reductions), so trained matrices are not guaranteed
bit-equal across backends, only statistically equivalent.
"""

from __future__ import annotations

import numpy as np

from .rng import TRAIN_STREAM_BASE, Xoshiro256StarStar, stream_seed

IS_COMPILED = False


def rng_u64_sequence(seed: int, count: int) -> np.ndarray:
    rng = Xoshiro256StarStar(seed)
    return np.array([rng.next_u64() for _ in range(count)], dtype=np.uint64)


def alias_draws(prob, alias, seed: int, size: int, stream: int = 0) -> np.ndarray:
    """Bulk alias-table draws from one derived RNG stream."""
    rng = Xoshiro256StarStar(stream_seed(seed, stream))
    k = len(prob)
    out = np.empty(size, dtype=np.int32)
    for i in range(size):
        j = int(rng.random() * k)
        out[i] = j if rng.random() < prob[j] else alias[j]
    return out


def walk_pass_range(
    indptr,
    indices,
    out_walks,
    out_lengths,
    pass_lo: int,
    pass_hi: int,
    walk_length: int,
    seed: int,
    first_order: bool,
    table_prob,
    table_alias,
    table_offsets,
) -> None:
    """Generate passes [pass_lo, pass_hi) into their corpus rows."""
    n = len(indptr) - 1
    for ipass in range(pass_lo, pass_hi):
        rng = Xoshiro256StarStar(stream_seed(seed, ipass))
        order = list(range(n))
        rng.shuffle(order)
        base = ipass * n
        for slot, start in enumerate(order):
            row = base + slot
            deg = int(indptr[start + 1] - indptr[start])
            out_walks[row, 0] = start
            if deg == 0:
                out_lengths[row] = 1
                continue
            prev = start
            cur = int(indices[indptr[start] + rng.randbelow(deg)])
            out_walks[row, 1] = cur
            for step in range(2, walk_length):
                deg_cur = int(indptr[cur + 1] - indptr[cur])
                if first_order:
                    nxt = int(indices[indptr[cur] + rng.randbelow(deg_cur)])
                else:
                    # Table for state (prev, cur) sits at the CSR slot of (cur -> prev).
                    lo = int(indptr[cur])
                    slot_j = lo + int(np.searchsorted(indices[lo : lo + deg_cur], prev))
                    toff = int(table_offsets[slot_j])
                    j = int(rng.random() * deg_cur)
                    if rng.random() < table_prob[toff + j]:
                        idx = j
                    else:
                        idx = int(table_alias[toff + j])
                    nxt = int(indices[lo + idx])
                out_walks[row, step] = nxt
                prev, cur = cur, nxt
            out_lengths[row] = walk_length


def _kernel_value(kernel_id: int, param: float, r: float) -> float:
    if kernel_id == 0:
        return float(np.exp(-r / param))
    return float((1.0 + r) ** (-param))


def _grad_coef(kernel_id: int, param: float, r: float, k: float) -> float:
    if kernel_id == 0:
        return -2.0 / param * k
    return -2.0 * param * k / (1.0 + r)


def train_shard(
    A,
    B,
    walks,
    lengths,
    walk_lo: int,
    walk_hi: int,
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
    worker_id: int,
    shared_counter,
    bucket_sums,
    bucket_counts,
    bucket_size: int,
    record_buckets: bool,
    epoch_stats,
    abort_flag,
    check_every: int = 100_000,
) -> None:
    """SGD over the (center, context) pairs of walks [walk_lo, walk_hi).

    Per pair: one positive term plus ``negatives`` noise terms; all gradients
    are evaluated at the pre-update parameters, then applied.  The learning
    rate decays linearly with the shared count of processed center positions.
    """
    rng = Xoshiro256StarStar(stream_seed(seed, TRAIN_STREAM_BASE + worker_id))
    n_noise = len(noise_prob)
    n_terms = 1 + negatives
    rows = np.empty(n_terms, dtype=np.int64)
    coefs = np.empty(n_terms, dtype=np.float64)
    diffs = np.empty((n_terms, A.shape[1]), dtype=np.float64)
    inv_total = 1.0 / max(total_positions, 1)
    pair_ordinal = 0
    loss_since_check = 0.0

    for epoch in range(epochs):
        loss_sum = 0.0
        pair_count = 0
        for iw in range(walk_lo, walk_hi):
            length = int(lengths[iw])
            walk = walks[iw]
            done = int(shared_counter[0])
            for l in range(length):
                lr = lr0 * (1.0 - (done + l) * inv_total)
                lr = max(lr, lr_min)
                v = int(walk[l])
                av = A[v]
                lo = max(0, l - window)
                hi = min(length - 1, l + window)
                for kpos in range(lo, hi + 1):
                    if kpos == l:
                        continue
                    rows[0] = int(walk[kpos])
                    for t in range(negatives):
                        j = int(rng.random() * n_noise)
                        if rng.random() < noise_prob[j]:
                            rows[1 + t] = j
                        else:
                            rows[1 + t] = int(noise_alias[j])
                    pair_loss = 0.0
                    for t in range(n_terms):
                        b = B[rows[t]]
                        diff = av - b
                        r = float(diff @ diff)
                        k = _kernel_value(kernel_id, kernel_param, r)
                        c = _grad_coef(kernel_id, kernel_param, r, k)
                        if t == 0:
                            pair_loss += (1.0 - k) * (1.0 - k)
                            coefs[t] = lr * 2.0 * (1.0 - k) * c
                        else:
                            pair_loss += k * k
                            coefs[t] = -lr * 2.0 * k * c
                        diffs[t] = diff
                    av += coefs @ diffs
                    for t in range(n_terms):
                        B[rows[t]] -= coefs[t] * diffs[t]

                    loss_sum += pair_loss
                    loss_since_check += pair_loss
                    pair_count += 1
                    if record_buckets:
                        bidx = pair_ordinal // bucket_size
                        if bidx < bucket_sums.shape[0]:
                            bucket_sums[bidx] += pair_loss
                            bucket_counts[bidx] += 1
                    pair_ordinal += 1
                    if pair_ordinal % check_every == 0:
                        if not np.isfinite(loss_since_check) or abort_flag[0]:
                            abort_flag[0] = 1
                            return
                        loss_since_check = 0.0
            shared_counter[0] += length
        epoch_stats[epoch, 0] += loss_sum
        epoch_stats[epoch, 1] += pair_count
        if not np.isfinite(loss_sum):
            abort_flag[0] = 1
            return
