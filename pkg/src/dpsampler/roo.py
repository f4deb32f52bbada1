"""Reveal-or-obscure release: mix the empirical distribution with uniform.

With probability q the mechanism outputs a uniform letter (obscure); with
probability 1-q it outputs a uniformly chosen dataset entry (reveal). The
conditional output law is therefore exactly

    P(Y = y | dataset) = q/k + (1 - q) * phat(y),

which gives closed forms for the privacy level, the worst-case accuracy, and
the dataset size required to reach a target (alpha, epsilon) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CategoricalDistribution,
    CountVector,
    RandomStream,
    draw_bernoulli,
    draw_from_counts,
    draw_uniform_letter,
    empirical_distribution,
)


@dataclass(frozen=True)
class RooParams:
    """Obscuring probability q together with the (n, k) it was chosen for."""

    q: float
    k: int
    n: int

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q!r}")
        if self.k < 2:
            raise ValueError("alphabet size must be at least 2")
        if self.n < 1:
            raise ValueError("dataset size must be at least 1")


def roo_conditional_output(d: CountVector, q: float) -> CategoricalDistribution:
    """Exact output law q/k + (1-q) * phat for one dataset."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    phat = empirical_distribution(d).probs
    return CategoricalDistribution(d.k, q / d.k + (1.0 - q) * phat)


def roo_sample(d: CountVector, q: float, rng: RandomStream) -> int:
    """One release: uniform letter with probability q, else a dataset entry."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    if draw_bernoulli(q, rng):
        return draw_uniform_letter(d.k, rng)
    return draw_from_counts(d, rng)


def roo_epsilon(q: float, n: int, k: int) -> float:
    """Privacy level log(1 + k(1-q)/(nq)) of the mechanism with parameter q.

    Raises for q = 0: a revealed-only output assigns probability zero to
    letters missing from the dataset, so no finite ratio bound exists.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    if q == 0.0:
        raise ValueError("q = 0 has no finite privacy guarantee")
    return math.log1p(k * (1.0 - q) / (n * q))


def _worst_case_ratio(q: float, n: int, k: int) -> float:
    # Worst neighboring pair: a letter with count 1 on one side and 0 on the
    # other. Mirrors the auditor's arithmetic exactly (phat entries are c/n).
    base = q / k
    return (base + (1.0 - q) * (1.0 / n)) / base


def roo_q_for_epsilon(epsilon: float, n: int, k: int) -> float:
    """Smallest obscuring probability achieving the given privacy level.

    Inverts the privacy formula: q = 1 / (1 + (n/k)(e^eps - 1)). The result
    is rounded toward the private side (up by at most a few ulps) so that the
    worst-case likelihood ratio stays at or below e^eps in double arithmetic,
    never above it.
    """
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be a positive finite real, got {epsilon!r}")
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    q = 1.0 / (1.0 + (n / k) * math.expm1(epsilon))
    bound = math.exp(epsilon)
    while _worst_case_ratio(q, n, k) > bound:
        q = math.nextafter(q, 1.0)
    return q


def roo_accuracy(q: float, k: int) -> float:
    """Worst-case total variation q(1 - 1/k) over all input distributions."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    return q * (1.0 - 1.0 / k)


def _check_alpha_range(k: int, alpha: float) -> None:
    if k < 2:
        raise ValueError("alphabet size must be at least 2")
    if not 0.0 < alpha < 1.0 - 1.0 / k:
        raise ValueError(f"alpha must lie in (0, 1 - 1/k) = (0, {1.0 - 1.0 / k}), got {alpha!r}")


def roo_sampling_complexity(k: int, alpha: float, epsilon: float) -> float:
    """Real-valued dataset size (k(1-alpha) - 1) / (alpha (e^eps - 1))."""
    _check_alpha_range(k, alpha)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return (k * (1.0 - alpha) - 1.0) / (alpha * math.expm1(epsilon))


def required_dataset_size(k: int, alpha: float, epsilon: float) -> int:
    """Smallest integer dataset size meeting the (alpha, epsilon) target."""
    return max(1, math.ceil(roo_sampling_complexity(k, alpha, epsilon)))


def roo_marginal_output(p: CategoricalDistribution, q: float) -> CategoricalDistribution:
    """Output law over data randomness: Q(y) = q/k + (1-q) P(y).

    Averaging the conditional law over datasets drawn i.i.d. from p collapses
    to this closed form because the empirical distribution is unbiased.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    return CategoricalDistribution(p.k, q / p.k + (1.0 - q) * p.probs)


class RooConditional:
    """Callable dataset -> exact output law, with a vectorized batch path."""

    def __init__(self, q: float):
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {q!r}")
        self.q = q

    def __call__(self, d: CountVector) -> CategoricalDistribution:
        return roo_conditional_output(d, self.q)

    def batch(self, counts: np.ndarray) -> np.ndarray:
        """Rows of conditional output laws for a (trials, k) count matrix."""
        counts = np.asarray(counts)
        k = counts.shape[1]
        n = counts.sum(axis=1, keepdims=True)
        return self.q / k + (1.0 - self.q) * (counts / n)
