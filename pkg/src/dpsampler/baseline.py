"""Prior-work comparators: the additive-Laplace sampler and the analytic
sampling-complexity formulas used in the three-way comparison.

The Laplace route noises the empirical distribution coordinate-wise, projects
back onto the probability simplex, and samples a letter from the projected
vector. Its accuracy bound 2k/(n eps) and complexity 2k/(alpha eps), and the
subset-randomized-response complexity (k-1)(1-alpha)/(alpha eps), are the
curves the obscuring mechanism is compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CategoricalDistribution, CountVector, RandomStream, empirical_distribution
from .roo import _check_alpha_range, roo_sampling_complexity

_PROJECTION_TOL = 1e-12
_PROJECTION_MAX_ITER = 200


@dataclass(frozen=True)
class LaplaceParams:
    """Per-coordinate noise scale applied to empirical probabilities."""

    scale: float
    epsilon: float

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be a positive finite real, got {self.scale!r}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a positive finite real, got {self.epsilon!r}")

    @classmethod
    def for_budget(cls, epsilon: float, n: int) -> "LaplaceParams":
        """Standard calibration: the empirical distribution changes by at
        most 2/n in L1 between neighbors, so scale = 2/(n eps)."""
        if n < 1:
            raise ValueError("dataset size must be at least 1")
        return cls(scale=2.0 / (n * epsilon), epsilon=epsilon)


def laplace_noise(scale: float, size, rng: RandomStream) -> np.ndarray:
    """Laplace(0, scale) noise via inverse CDF on the stream's uniforms."""
    u = np.asarray(rng.uniforms(size)) - 0.5
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Deterministic water-filling onto the probability simplex.

    Negatives are clipped to zero, then the remaining surplus or deficit is
    spread uniformly over the coordinates that stay inside [0, 1], repeating
    until the vector sums to one. A vector with no mass left becomes uniform.
    """
    return project_rows_to_simplex(np.asarray(v, dtype=np.float64)[None, :])[0]


def project_rows_to_simplex(rows: np.ndarray) -> np.ndarray:
    """Row-wise water-filling projection for a (trials, k) matrix."""
    w = np.clip(np.asarray(rows, dtype=np.float64), 0.0, 1.0)
    k = w.shape[1]
    for _ in range(_PROJECTION_MAX_ITER):
        total = w.sum(axis=1, keepdims=True)
        diff = 1.0 - total
        done = np.abs(diff) <= _PROJECTION_TOL
        if np.all(done):
            break
        dead = (total == 0.0) & ~done
        if np.any(dead):
            w[dead[:, 0]] = 1.0 / k
            continue
        active = np.where(diff > 0, w < 1.0, w > 0.0) & ~done
        counts = active.sum(axis=1, keepdims=True)
        # Rows with nothing adjustable in the needed direction cannot occur:
        # a row summing above 1 has a positive entry, one below 1 has an
        # entry under 1.
        step = np.where(active, diff / np.maximum(counts, 1), 0.0)
        w = np.clip(w + step, 0.0, 1.0)
    return w


def laplace_output_vector(d: CountVector, params: LaplaceParams, rng: RandomStream) -> CategoricalDistribution:
    """The projected noisy empirical distribution for one dataset."""
    phat = empirical_distribution(d).probs
    noised = phat + laplace_noise(params.scale, d.k, rng)
    return CategoricalDistribution(d.k, project_to_simplex(noised))


def laplace_sample(d: CountVector, params: LaplaceParams, rng: RandomStream) -> int:
    """One release: noise the empirical distribution, project, sample."""
    probs = laplace_output_vector(d, params, rng).probs
    cum = np.cumsum(probs)
    t = rng.uniform() * cum[-1]
    return min(int(np.searchsorted(cum, t, side="right")), d.k - 1) + 1


def baseline_accuracy(k: int, n: int, epsilon: float) -> float:
    """Accuracy bound 2k/(n eps); values above 1 mean the bound is vacuous."""
    if k < 2 or n < 1 or not epsilon > 0:
        raise ValueError("need k >= 2, n >= 1, epsilon > 0")
    return 2.0 * k / (n * epsilon)


def baseline_sampling_complexity(k: int, alpha: float, epsilon: float) -> float:
    """Dataset size 2k/(alpha eps) required by the Laplace-projection route."""
    if k < 2 or not 0 < alpha < 1 or not epsilon > 0:
        raise ValueError("need k >= 2, alpha in (0, 1), epsilon > 0")
    return 2.0 * k / (alpha * epsilon)


def subrr_sampling_complexity(k: int, alpha: float, epsilon: float) -> float:
    """Subset-randomized-response complexity (k-1)(1-alpha)/(alpha eps)."""
    if k < 2 or not 0 < alpha < 1 or not epsilon > 0:
        raise ValueError("need k >= 2, alpha in (0, 1), epsilon > 0")
    return (k - 1) * (1.0 - alpha) / (alpha * epsilon)


@dataclass(frozen=True)
class ComplexityComparison:
    n_roo: float
    n_subrr: float
    n_baseline: float
    ordering_ok: bool


def complexity_comparison(k: int, alpha: float, epsilon: float) -> ComplexityComparison:
    """Three-way dataset-size comparison at one (k, alpha, epsilon) point.

    ``ordering_ok`` records whether the obscuring mechanism needs strictly
    fewer samples than both comparators (with the subset-RR count never above
    the Laplace one).
    """
    _check_alpha_range(k, alpha)
    n_roo = roo_sampling_complexity(k, alpha, epsilon)
    n_subrr = subrr_sampling_complexity(k, alpha, epsilon)
    n_baseline = baseline_sampling_complexity(k, alpha, epsilon)
    return ComplexityComparison(
        n_roo=n_roo,
        n_subrr=n_subrr,
        n_baseline=n_baseline,
        ordering_ok=(n_roo < n_subrr) and (n_roo < n_baseline) and (n_subrr <= n_baseline),
    )
