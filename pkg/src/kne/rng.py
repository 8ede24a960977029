"""Seedable, splittable 64-bit random number generation.

The generator is xoshiro256** seeded through splitmix64, with independent
streams derived arithmetically from a master seed.  The compiled backend
re-implements exactly the same update and derivation rules in C, so a given
(seed, stream) pair yields the same draw sequence from either backend.
Bounded draws use ``floor(u01 * n)``; the O(n * 2^-53) bias is negligible for
every support size used here and keeps the two implementations bit-compatible.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0  # 2^-53

# Stream-id layout: walk generation uses one stream per pass (ids 0..passes-1),
# training workers use TRAIN_STREAM_BASE + worker_id.  Keeping the layout in one
# place guarantees the backends never collide.
TRAIN_STREAM_BASE = 1 << 32


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def stream_seed(seed: int, stream: int) -> int:
    """Derive the seed of an independent stream from the master seed."""
    return (seed + (stream + 1) * GOLDEN) & MASK64


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 state initialization."""

    __slots__ = ("_seed", "_s")

    def __init__(self, seed: int):
        self._seed = seed & MASK64
        state = self._seed
        words = []
        for _ in range(4):
            state, w = splitmix64(state)
            words.append(w)
        if not any(words):
            words[0] = GOLDEN
        self._s = words

    def spawn(self, stream: int) -> "Xoshiro256StarStar":
        """Independent generator for the given stream id."""
        return Xoshiro256StarStar(stream_seed(self._seed, stream))

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.random() * n)

    def shuffle(self, seq) -> None:
        """In-place Fisher-Yates shuffle (descending index order)."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]
