# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: walk generation, alias sampling, and SGD training.

Mirror of ``_reference``: same RNG (xoshiro256** + splitmix64 streams), same
draw order, same update formulas.  Keep the two in sync.
"""

import numpy as np

from libc.math cimport exp, pow, isfinite
from libc.stdint cimport uint64_t, int32_t, int64_t

IS_COMPILED = True

cdef uint64_t GOLDEN = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t MIX1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t MIX2 = <uint64_t>0x94D049BB133111EB
cdef uint64_t TRAIN_STREAM_BASE = (<uint64_t>1) << 32
cdef double INV53 = 1.0 / 9007199254740992.0


cdef struct Xo:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _splitmix_next(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] = state[0] + GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t _stream_seed(uint64_t seed, uint64_t stream) noexcept nogil:
    return seed + (stream + 1) * GOLDEN


cdef void _xo_seed(Xo* x, uint64_t seed) noexcept nogil:
    cdef uint64_t state = seed
    x.s0 = _splitmix_next(&state)
    x.s1 = _splitmix_next(&state)
    x.s2 = _splitmix_next(&state)
    x.s3 = _splitmix_next(&state)
    if (x.s0 | x.s1 | x.s2 | x.s3) == 0:
        x.s0 = GOLDEN


cdef inline uint64_t _xo_next(Xo* x) noexcept nogil:
    cdef uint64_t result = _rotl(x.s1 * 5, 7) * 9
    cdef uint64_t t = x.s1 << 17
    x.s2 ^= x.s0
    x.s3 ^= x.s1
    x.s1 ^= x.s2
    x.s0 ^= x.s3
    x.s2 ^= t
    x.s3 = _rotl(x.s3, 45)
    return result


cdef inline double _u01(Xo* x) noexcept nogil:
    return <double>(_xo_next(x) >> 11) * INV53


cdef inline Py_ssize_t _below(Xo* x, Py_ssize_t n) noexcept nogil:
    return <Py_ssize_t>(_u01(x) * n)


def rng_u64_sequence(seed, Py_ssize_t count):
    """Raw generator outputs, for cross-backend parity checks."""
    cdef Xo x
    _xo_seed(&x, <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    out = np.empty(count, dtype=np.uint64)
    cdef uint64_t[:] view = out
    cdef Py_ssize_t i
    for i in range(count):
        view[i] = _xo_next(&x)
    return out


def alias_draws(double[:] prob, int32_t[:] alias, seed, Py_ssize_t size, stream=0):
    """Bulk alias-table draws from one derived RNG stream."""
    cdef Xo x
    _xo_seed(&x, _stream_seed(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF), <uint64_t>int(stream)))
    out = np.empty(size, dtype=np.int32)
    cdef int32_t[:] view = out
    cdef Py_ssize_t i, j
    cdef Py_ssize_t k = prob.shape[0]
    with nogil:
        for i in range(size):
            j = <Py_ssize_t>(_u01(&x) * k)
            if _u01(&x) < prob[j]:
                view[i] = <int32_t>j
            else:
                view[i] = alias[j]
    return out


cdef inline Py_ssize_t _bisect(int32_t[:] arr, Py_ssize_t lo, Py_ssize_t hi, int32_t target) noexcept nogil:
    # Leftmost index of target in sorted arr[lo:hi]; caller guarantees presence.
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef void _walk_passes(
    int64_t[:] indptr,
    int32_t[:] indices,
    int32_t[:, :] out_walks,
    int32_t[:] out_lengths,
    Py_ssize_t pass_lo,
    Py_ssize_t pass_hi,
    int walk_length,
    uint64_t master,
    bint first_order,
    double[:] table_prob,
    int32_t[:] table_alias,
    int64_t[:] table_offsets,
    int64_t[:] order,
) noexcept nogil:
    cdef Xo x
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t ipass, i, j, slot, row, step, deg, deg_cur, lo, slot_j, idx
    cdef int64_t start, prev, cur, nxt, tmp
    cdef int64_t toff

    for ipass in range(pass_lo, pass_hi):
        _xo_seed(&x, _stream_seed(master, <uint64_t>ipass))
        for i in range(n):
            order[i] = i
        for i in range(n - 1, 0, -1):
            j = _below(&x, i + 1)
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp
        for slot in range(n):
            start = order[slot]
            row = ipass * n + slot
            deg = indptr[start + 1] - indptr[start]
            out_walks[row, 0] = <int32_t>start
            if deg == 0:
                out_lengths[row] = 1
                continue
            prev = start
            cur = indices[indptr[start] + _below(&x, deg)]
            out_walks[row, 1] = <int32_t>cur
            for step in range(2, walk_length):
                lo = indptr[cur]
                deg_cur = indptr[cur + 1] - lo
                if first_order:
                    nxt = indices[lo + _below(&x, deg_cur)]
                else:
                    slot_j = _bisect(indices, lo, lo + deg_cur, <int32_t>prev)
                    toff = table_offsets[slot_j]
                    j = <Py_ssize_t>(_u01(&x) * deg_cur)
                    if _u01(&x) < table_prob[toff + j]:
                        idx = j
                    else:
                        idx = table_alias[toff + j]
                    nxt = indices[lo + idx]
                out_walks[row, step] = <int32_t>nxt
                prev = cur
                cur = nxt
            out_lengths[row] = <int32_t>walk_length


def walk_pass_range(
    int64_t[:] indptr,
    int32_t[:] indices,
    int32_t[:, :] out_walks,
    int32_t[:] out_lengths,
    Py_ssize_t pass_lo,
    Py_ssize_t pass_hi,
    int walk_length,
    seed,
    bint first_order,
    double[:] table_prob,
    int32_t[:] table_alias,
    int64_t[:] table_offsets,
):
    """Generate passes [pass_lo, pass_hi) into their corpus rows."""
    cdef uint64_t master = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    order_arr = np.empty(indptr.shape[0] - 1, dtype=np.int64)
    cdef int64_t[:] order = order_arr
    with nogil:
        _walk_passes(
            indptr, indices, out_walks, out_lengths, pass_lo, pass_hi,
            walk_length, master, first_order, table_prob, table_alias,
            table_offsets, order,
        )


cdef inline double _kernel_value(int kernel_id, double param, double r) noexcept nogil:
    if kernel_id == 0:
        return exp(-r / param)
    return pow(1.0 + r, -param)


cdef inline double _grad_coef(int kernel_id, double param, double r, double k) noexcept nogil:
    if kernel_id == 0:
        return -2.0 / param * k
    return -2.0 * param * k / (1.0 + r)


cdef void _train_loop(
    double[:, :] A,
    double[:, :] B,
    int32_t[:, :] walks,
    int32_t[:] lengths,
    Py_ssize_t walk_lo,
    Py_ssize_t walk_hi,
    int window,
    int negatives,
    double[:] noise_prob,
    int32_t[:] noise_alias,
    int kernel_id,
    double kernel_param,
    double lr0,
    double lr_min,
    int64_t total_positions,
    int epochs,
    Xo* x,
    int64_t[:] shared_counter,
    double[:] bucket_sums,
    int64_t[:] bucket_counts,
    Py_ssize_t bucket_size,
    bint record_buckets,
    double[:, :] epoch_stats,
    int32_t[:] abort_flag,
    Py_ssize_t check_every,
    int64_t[:] rows,
    double[:] coefs,
    double[:, :] diffs,
    double[:] acc,
) noexcept nogil:
    cdef Py_ssize_t d = A.shape[1]
    cdef Py_ssize_t n_terms = 1 + negatives
    cdef Py_ssize_t n_noise = noise_prob.shape[0]
    cdef double inv_total = 1.0 / (total_positions if total_positions > 0 else 1)
    cdef Py_ssize_t pair_ordinal = 0, bidx
    cdef double loss_since_check = 0.0
    cdef int epoch
    cdef Py_ssize_t iw, l, kpos, lo, hi, t, i, j, v
    cdef int64_t done, length, u
    cdef double lr, pair_loss, loss_sum, r, k_val, c, diff, coef_t
    cdef double pair_count

    for epoch in range(epochs):
        loss_sum = 0.0
        pair_count = 0.0
        for iw in range(walk_lo, walk_hi):
            length = lengths[iw]
            done = shared_counter[0]
            for l in range(length):
                lr = lr0 * (1.0 - (done + l) * inv_total)
                if lr < lr_min:
                    lr = lr_min
                v = walks[iw, l]
                lo = l - window
                if lo < 0:
                    lo = 0
                hi = l + window
                if hi > length - 1:
                    hi = length - 1
                for kpos in range(lo, hi + 1):
                    if kpos == l:
                        continue
                    rows[0] = walks[iw, kpos]
                    for t in range(negatives):
                        j = <Py_ssize_t>(_u01(x) * n_noise)
                        if _u01(x) < noise_prob[j]:
                            rows[1 + t] = j
                        else:
                            rows[1 + t] = noise_alias[j]
                    pair_loss = 0.0
                    for i in range(d):
                        acc[i] = 0.0
                    for t in range(n_terms):
                        u = rows[t]
                        r = 0.0
                        for i in range(d):
                            diff = A[v, i] - B[u, i]
                            diffs[t, i] = diff
                            r += diff * diff
                        k_val = _kernel_value(kernel_id, kernel_param, r)
                        c = _grad_coef(kernel_id, kernel_param, r, k_val)
                        if t == 0:
                            pair_loss += (1.0 - k_val) * (1.0 - k_val)
                            coef_t = lr * 2.0 * (1.0 - k_val) * c
                        else:
                            pair_loss += k_val * k_val
                            coef_t = -lr * 2.0 * k_val * c
                        coefs[t] = coef_t
                        for i in range(d):
                            acc[i] += coef_t * diffs[t, i]
                    for i in range(d):
                        A[v, i] += acc[i]
                    for t in range(n_terms):
                        u = rows[t]
                        coef_t = coefs[t]
                        for i in range(d):
                            B[u, i] -= coef_t * diffs[t, i]

                    loss_sum += pair_loss
                    loss_since_check += pair_loss
                    pair_count += 1.0
                    if record_buckets:
                        bidx = pair_ordinal // bucket_size
                        if bidx < bucket_sums.shape[0]:
                            bucket_sums[bidx] += pair_loss
                            bucket_counts[bidx] += 1
                    pair_ordinal += 1
                    if pair_ordinal % check_every == 0:
                        if (not isfinite(loss_since_check)) or abort_flag[0]:
                            abort_flag[0] = 1
                            return
                        loss_since_check = 0.0
            shared_counter[0] += length
        epoch_stats[epoch, 0] += loss_sum
        epoch_stats[epoch, 1] += pair_count
        if not isfinite(loss_sum):
            abort_flag[0] = 1
            return


def train_shard(
    double[:, :] A,
    double[:, :] B,
    int32_t[:, :] walks,
    int32_t[:] lengths,
    Py_ssize_t walk_lo,
    Py_ssize_t walk_hi,
    int window,
    int negatives,
    double[:] noise_prob,
    int32_t[:] noise_alias,
    int kernel_id,
    double kernel_param,
    double lr0,
    double lr_min,
    int64_t total_positions,
    int epochs,
    seed,
    int worker_id,
    int64_t[:] shared_counter,
    double[:] bucket_sums,
    int64_t[:] bucket_counts,
    Py_ssize_t bucket_size,
    bint record_buckets,
    double[:, :] epoch_stats,
    int32_t[:] abort_flag,
    Py_ssize_t check_every=100000,
):
    """SGD over the (center, context) pairs of walks [walk_lo, walk_hi).

    Gradients of one positive plus ``negatives`` noise terms are evaluated
    at the pre-update parameters and then applied; the learning rate decays
    linearly with the shared processed-position counter.
    """
    cdef Py_ssize_t d = A.shape[1]
    cdef Py_ssize_t n_terms = 1 + negatives
    rows_arr = np.empty(n_terms, dtype=np.int64)
    coefs_arr = np.empty(n_terms, dtype=np.float64)
    diffs_arr = np.empty((n_terms, d), dtype=np.float64)
    acc_arr = np.empty(d, dtype=np.float64)
    cdef int64_t[:] rows = rows_arr
    cdef double[:] coefs = coefs_arr
    cdef double[:, :] diffs = diffs_arr
    cdef double[:] acc = acc_arr

    cdef Xo x
    _xo_seed(&x, _stream_seed(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF),
                              TRAIN_STREAM_BASE + <uint64_t>worker_id))
    with nogil:
        _train_loop(
            A, B, walks, lengths, walk_lo, walk_hi, window, negatives,
            noise_prob, noise_alias, kernel_id, kernel_param, lr0, lr_min,
            total_positions, epochs, &x, shared_counter, bucket_sums,
            bucket_counts, bucket_size, record_buckets, epoch_stats,
            abort_flag, check_every, rows, coefs, diffs, acc,
        )
