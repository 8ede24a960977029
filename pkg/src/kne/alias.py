"""Alias method for O(1) sampling from fixed discrete distributions (Vose)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import Xoshiro256StarStar


@dataclass
class AliasTable:
    """Preprocessed tables; ``sample`` returns index i with probability
    proportional to the construction weight w_i."""

    prob: np.ndarray  # float64, acceptance threshold per slot
    alias: np.ndarray  # int32, fallback outcome per slot

    @classmethod
    def from_weights(cls, weights) -> "AliasTable":
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise DataError("alias table needs a non-empty 1-D weight vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DataError("alias table weights must be finite and non-negative")
        total = float(w.sum())
        if total <= 0.0:
            raise DataError("alias table weights sum to zero")

        k = w.size
        scaled = w * (k / total)
        prob = np.ones(k, dtype=np.float64)
        alias = np.arange(k, dtype=np.int32)  # self-alias keeps sampling branch-safe
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            l = large.pop()
            prob[s] = scaled[s]
            alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        # Leftovers are 1.0 up to rounding; they keep prob=1 and self-alias.
        return cls(prob=prob, alias=alias)

    def __len__(self) -> int:
        return int(self.prob.size)

    def sample(self, rng: Xoshiro256StarStar) -> int:
        """One draw; consumes exactly two generator outputs."""
        j = rng.randbelow(len(self))
        if rng.random() < self.prob[j]:
            return j
        return int(self.alias[j])

    def sample_many(self, rng: Xoshiro256StarStar, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.int32)
        for i in range(size):
            out[i] = self.sample(rng)
        return out


def build_alias_table(weights) -> AliasTable:
    return AliasTable.from_weights(weights)
