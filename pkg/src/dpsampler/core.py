"""Core types, distance metric, and deterministic randomness primitives.

Everything downstream (mechanisms, auditor, Monte Carlo estimators) is built
on the value types and draw primitives defined here. All values are immutable
and safe to share across threads; a ``RandomStream`` is the only stateful
object and must be owned by a single caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Tolerance for "sums to one" checks on probability vectors.
PROB_SUM_TOL = 1e-12

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class CategoricalDistribution:
    """Probability vector over the alphabet {1, ..., k}.

    Attributes:
        k: alphabet size, at least 2.
        probs: length-k vector of probabilities summing to 1.
    """

    k: int
    probs: np.ndarray

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.k!r}")
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (self.k,):
            raise ValueError(f"expected {self.k} probabilities, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite")
        if np.any(probs < 0.0) or np.any(probs > 1.0 + PROB_SUM_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1 within {PROB_SUM_TOL}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, k: int) -> "CategoricalDistribution":
        return cls(k, np.full(k, 1.0 / k))

    def prob(self, letter: int) -> float:
        """Probability of a 1-based letter."""
        if not 1 <= letter <= self.k:
            raise ValueError(f"letter {letter} outside [1..{self.k}]")
        return float(self.probs[letter - 1])


@dataclass(frozen=True, eq=False)
class CountVector:
    """A dataset of n observations over {1, ..., k}, stored as per-letter counts.

    The per-letter counts are the sufficient statistic for every mechanism in
    this package; two datasets with equal counts are indistinguishable.
    """

    k: int
    counts: np.ndarray

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.k!r}")
        counts = np.asarray(self.counts)
        if counts.shape != (self.k,):
            raise ValueError(f"expected {self.k} counts, got shape {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == np.floor(counts)):
                raise ValueError("counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if int(counts.sum()) < 1:
            raise ValueError("dataset must contain at least one observation")
        counts.flags.writeable = False
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        """Total number of observations."""
        return int(self.counts.sum())

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.counts)

    @classmethod
    def from_observations(cls, values, k: int) -> "CountVector":
        """Build counts from raw 1-based observations."""
        values = np.asarray(values, dtype=np.int64)
        if values.size == 0:
            raise ValueError("dataset must contain at least one observation")
        if np.any(values < 1) or np.any(values > k):
            bad = values[(values < 1) | (values > k)][0]
            raise ValueError(f"observation {bad} outside [1..{k}]")
        return cls(k, np.bincount(values - 1, minlength=k))


@dataclass(frozen=True)
class PrivacyBudget:
    """Privacy budget epsilon plus the relative slack used in ratio checks."""

    epsilon: float
    ratio_tolerance: float = 1e-9

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a positive finite real, got {self.epsilon!r}")
        if self.ratio_tolerance < 0:
            raise ValueError("ratio_tolerance must be non-negative")


class RandomStream:
    """Deterministic uniform source backed by the Philox 4x64 counter PRNG.

    The Philox key is the pair (seed, stream_id), so distinct stream ids give
    statistically independent substreams of the same seed. A given
    (seed, stream_id) produces one fixed sequence of draws on every run and
    platform. Instances are stateful and must not be shared across threads;
    parallel workers each own a distinct stream_id.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def substream(self, offset: int) -> "RandomStream":
        """Fresh stream with the same seed and stream_id shifted by offset."""
        return RandomStream(self.seed, self.stream_id + int(offset))

    def uniform(self) -> float:
        """One double in [0, 1)."""
        return float(self._gen.random())

    def uniforms(self, size) -> np.ndarray:
        """Array of doubles in [0, 1)."""
        return self._gen.random(size)


def empirical_distribution(d: CountVector) -> CategoricalDistribution:
    """Per-letter counts divided by n."""
    return CategoricalDistribution(d.k, d.counts / d.n)


def min_count(d: CountVector) -> int:
    """Smallest per-letter count; lies in {0, ..., floor(n/k)}."""
    return int(d.counts.min())


def tv_distance(p: CategoricalDistribution, q: CategoricalDistribution) -> float:
    """Total variation distance, half the L1 distance between the vectors."""
    if p.k != q.k:
        raise ValueError(f"alphabet mismatch: {p.k} vs {q.k}")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def draw_uniform_letter(k: int, rng: RandomStream) -> int:
    """Uniform letter in [1..k]."""
    if k < 2:
        raise ValueError("alphabet size must be at least 2")
    return min(int(rng.uniform() * k), k - 1) + 1


def draw_bernoulli(p: float, rng: RandomStream) -> bool:
    """True with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Bernoulli parameter must lie in [0, 1], got {p!r}")
    return rng.uniform() < p


def draw_from_counts(d: CountVector, rng: RandomStream) -> int:
    """Letter drawn with probability counts[x]/n, via inverse CDF on counts.

    Equivalent in law to picking a uniform index into the dataset and
    returning the observation there.
    """
    cum = np.cumsum(d.counts)
    t = rng.uniform() * d.n
    return int(np.searchsorted(cum, t, side="right")) + 1
