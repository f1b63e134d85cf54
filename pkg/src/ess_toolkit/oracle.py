"""Query-model access to a distribution: sampling and probability lookups.

A :class:`DualOracle` answers three kinds of queries -- draw a sample, look
up the probability of a label, or draw a sample together with its own
probability -- while counting every query.  Draws go through an alias table
over the positive-probability elements, so a single draw is O(1) and batch
draws are plain numpy pipelines.

Each draw consumes exactly one uniform double from the generator; the
sample stream is therefore a function of (seed, number of draws) alone,
and chunked batching cannot change what is drawn.
"""

from __future__ import annotations

import math
import operator

import numpy as np

from .distribution import DiscreteDistribution
from .errors import OutOfRangeError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def derive_seed(master_seed: int, index: int) -> int:
    """Mix a master seed and a stream index into an independent 64-bit seed.

    Pure integer arithmetic (splitmix64 finalizer applied twice), so the
    derived values are identical on every platform and independent of the
    order in which streams are created.
    """
    if operator.index(index) < 0:
        raise OutOfRangeError("stream index must be nonnegative")
    z = (operator.index(master_seed) + (index + 1) * _GOLDEN) & _MASK64
    for _ in range(2):
        z ^= z >> 30
        z = (z * 0xBF58476D1CE4E5B9) & _MASK64
        z ^= z >> 27
        z = (z * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
    return z


class AliasTable:
    """Alias structure over the positive-probability elements of a pmf."""

    __slots__ = ("size", "accept", "alias", "element_indices")

    def __init__(self, probs: np.ndarray) -> None:
        positive = np.flatnonzero(probs > 0.0)
        if positive.size == 0:
            raise OutOfRangeError("cannot sample: no positive-probability element")
        pos_probs = probs[positive]
        size = int(positive.size)
        # normalize exactly so the table encodes a true distribution even
        # when the stored mass is off by the validator tolerance
        scaled = (pos_probs * (size / math.fsum(pos_probs.tolist()))).tolist()

        accept = [1.0] * size
        alias = list(range(size))
        small = [i for i, w in enumerate(scaled) if w < 1.0]
        large = [i for i, w in enumerate(scaled) if w >= 1.0]
        while small and large:
            s = small.pop()
            big = large.pop()
            accept[s] = scaled[s]
            alias[s] = big
            scaled[big] -= 1.0 - scaled[s]
            if scaled[big] < 1.0:
                small.append(big)
            else:
                large.append(big)
        # float leftovers on either stack correspond to weight ~1
        for i in small:
            accept[i] = 1.0
        for i in large:
            accept[i] = 1.0

        self.size = size
        self.accept = np.asarray(accept, dtype=np.float64)
        self.alias = np.asarray(alias, dtype=np.int64)
        # identity mapping is skipped when every element is positive
        self.element_indices = None if size == probs.size else positive.astype(np.int64)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` element-table indices, one uniform double each."""
        u = rng.random(count)
        v = u * self.size
        bucket = v.astype(np.int64)
        np.minimum(bucket, self.size - 1, out=bucket)  # u*size may round up to size
        np.subtract(v, bucket, out=v)  # fractional part decides accept vs alias
        idx = np.where(v < self.accept[bucket], bucket, self.alias[bucket])
        if self.element_indices is not None:
            idx = self.element_indices[idx]
        return idx


def sampler_table(dist: DiscreteDistribution) -> AliasTable:
    """Alias table for ``dist``, built once and cached on the distribution."""
    return dist._cached("alias_table", lambda: AliasTable(dist.probs))


class DualOracle:
    """Sampling/evaluation handle over a validated distribution.

    Mutable state (random stream position, query counters) confines one
    instance to a single thread of execution at a time; any number of
    oracles may share one distribution.
    """

    def __init__(self, dist: DiscreteDistribution, seed: int) -> None:
        if not isinstance(dist, DiscreteDistribution):
            raise TypeError("DualOracle requires a validated DiscreteDistribution")
        seed = operator.index(seed)
        if not 0 <= seed <= _MASK64:
            raise OutOfRangeError(f"seed must fit in 64 bits, got {seed}")
        self.dist = dist
        self.seed = seed
        self.samp_count = 0
        self.eval_count = 0
        self._table = sampler_table(dist)
        self._rng = np.random.Generator(np.random.SFC64(seed))

    # -- single queries -------------------------------------------------

    def samp(self) -> int:
        """Draw one label; never returns a zero-probability label."""
        return int(self.samp_many(1)[0])

    def eval(self, label) -> float:
        """Exact probability of ``label``; raises UnknownLabelError if absent."""
        p = self.dist.prob_of(label)
        self.eval_count += 1
        return p

    def sample_with_prob(self) -> tuple[int, float]:
        """Draw one label together with its probability (one of each query)."""
        label = self.samp()
        return label, self.eval(label)

    def query_counts(self) -> tuple[int, int]:
        """Current (samp_count, eval_count) without modifying them."""
        return self.samp_count, self.eval_count

    # -- batch queries ----------------------------------------------------

    def _draw_indices(self, count: int) -> np.ndarray:
        count = operator.index(count)
        if count < 0:
            raise OutOfRangeError("sample count must be nonnegative")
        return self._table.draw(self._rng, count)

    def samp_many(self, count: int) -> np.ndarray:
        """Draw ``count`` labels as a uint64 array; counts ``count`` SAMP queries."""
        idx = self._draw_indices(count)
        self.samp_count += int(count)
        return self.dist.labels_at(idx)

    def sample_with_prob_many(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``count`` (label, probability) pairs as parallel arrays.

        Counts ``count`` SAMP queries and ``count`` EVAL queries; the
        probabilities are the exact stored values for the drawn labels.
        """
        idx = self._draw_indices(count)
        self.samp_count += int(count)
        self.eval_count += int(count)
        return self.dist.labels_at(idx), self.dist.probs[idx]
