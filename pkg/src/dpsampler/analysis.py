"""Ground-truth machinery: exhaustive privacy auditing over every neighboring
dataset pair, exact and Monte-Carlo marginal output laws, and accuracy
sweeps across privacy levels.

The auditor enumerates all count vectors of a given (n, k), evaluates the
mechanism's conditional output law on each, and maximizes the likelihood
ratio over ordered neighbor pairs and output letters. Marginal output laws
are computed exactly by enumeration when the composition count is small and
by a Rao-Blackwellized Monte Carlo average (of conditional output vectors,
not sampled letters) otherwise.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .baseline import LaplaceParams, baseline_accuracy, project_rows_to_simplex
from .core import (
    CategoricalDistribution,
    CountVector,
    PrivacyBudget,
    RandomStream,
    tv_distance,
)
from .dsroo import DsRooConditional, build_schedule
from .roo import RooConditional, roo_accuracy, roo_marginal_output, roo_q_for_epsilon

Mechanism = Callable[[CountVector], CategoricalDistribution]

# Hard ceiling on exhaustive enumeration (auditing).
DEFAULT_ENUMERATION_CAP = 10_000_000
# Above this composition count, marginal output laws switch to Monte Carlo.
DEFAULT_EXACT_CAP = 1_000_000
# Fixed Monte Carlo chunk size; chunk i always runs on substream i, so
# results are independent of the worker count.
MC_CHUNK_SIZE = 2048
# Substream ids reserved per sweep row (supports up to ~2^31 trials per row).
STREAM_STRIDE = 1 << 20


def worker_count() -> int:
    """Worker cap: DPSAMPLER_THREADS if set, else the CPU count."""
    env = os.environ.get("DPSAMPLER_THREADS")
    if env is not None:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def composition_count(n: int, k: int) -> int:
    """Number of count vectors: C(n + k - 1, k - 1)."""
    return math.comb(n + k - 1, k - 1)


def enumerate_count_vectors(n: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[CountVector]:
    """Every composition of n into k parts, first coordinate descending.

    Yields exactly C(n + k - 1, k - 1) vectors; errors up front when that
    count exceeds ``cap``.
    """
    if n < 1 or k < 2:
        raise ValueError("need n >= 1 and k >= 2")
    total = composition_count(n, k)
    if total > cap:
        raise ValueError(f"{total} count vectors for (n={n}, k={k}) exceeds the cap of {cap}")

    def rec(remaining: int, parts: int):
        if parts == 1:
            yield (remaining,)
            return
        for c in range(remaining, -1, -1):
            for tail in rec(remaining - c, parts - 1):
                yield (c,) + tail

    for combo in rec(n, k):
        yield CountVector(k, np.array(combo, dtype=np.int64))


def neighbors(d: CountVector) -> Iterator[CountVector]:
    """Datasets reachable by moving one observation to a different letter."""
    counts = d.counts
    for src in range(d.k):
        if counts[src] == 0:
            continue
        for dst in range(d.k):
            if dst == src:
                continue
            moved = counts.copy()
            moved[src] -= 1
            moved[dst] += 1
            yield CountVector(d.k, moved)


@dataclass(frozen=True)
class AuditReport:
    """Worst-case likelihood ratio over all ordered neighbor pairs.

    ``witness`` is the (dataset, neighbor, letter) triple achieving
    ``max_ratio``; ``passed`` compares against bound * (1 + ratio_tolerance).
    """

    epsilon: float
    max_ratio: float
    bound: float
    passed: bool
    witness: tuple[tuple[int, ...], tuple[int, ...], int]
    pairs_checked: int

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "pass": self.passed,
            "witness": {
                "dataset": list(self.witness[0]),
                "neighbor": list(self.witness[1]),
                "letter": self.witness[2],
            },
            "pairs_checked": self.pairs_checked,
        }


def audit_mechanism(
    mechanism: Mechanism,
    n: int,
    k: int,
    budget: PrivacyBudget,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> AuditReport:
    """Exhaustively verify the e^eps ratio bound for a conditional-output law.

    Ratio conventions on zero probabilities: 0/0 counts as 1 (neither output
    can occur, no distinguishing power) and positive/0 as +inf, which fails
    the audit outright.
    """
    laws: dict[tuple[int, ...], np.ndarray] = {}
    for d in enumerate_count_vectors(n, k, cap=cap):
        out = mechanism(d)
        if out.k != k:
            raise ValueError("mechanism returned a distribution over the wrong alphabet")
        laws[d.as_tuple()] = out.probs

    bound = math.exp(budget.epsilon)
    max_ratio = 0.0
    witness = None
    pairs = 0
    for d in enumerate_count_vectors(n, k, cap=cap):
        p_d = laws[d.as_tuple()]
        for nb in neighbors(d):
            pairs += 1
            p_nb = laws[nb.as_tuple()]
            for y in range(k):
                num = p_d[y]
                den = p_nb[y]
                if den == 0.0:
                    if num == 0.0:
                        ratio = 1.0
                    else:
                        ratio = math.inf
                else:
                    ratio = num / den
                if ratio > max_ratio:
                    max_ratio = ratio
                    witness = (d.as_tuple(), nb.as_tuple(), y + 1)

    assert witness is not None
    passed = max_ratio <= bound * (1.0 + budget.ratio_tolerance)
    return AuditReport(
        epsilon=budget.epsilon,
        max_ratio=float(max_ratio),
        bound=bound,
        passed=passed,
        witness=witness,
        pairs_checked=pairs,
    )


def multinomial_pmf(counts: Sequence[int], probs: np.ndarray) -> float:
    """Probability of a count vector under n i.i.d. draws from ``probs``.

    Uses the exact integer coefficient when it fits a double exactly and
    log-gamma arithmetic otherwise.
    """
    counts = [int(c) for c in counts]
    n = sum(counts)
    coef = math.factorial(n)
    for c in counts:
        coef //= math.factorial(c)
    prob = 1.0
    for c, p in zip(counts, probs):
        if c:
            if p == 0.0:
                return 0.0
            prob *= float(p) ** c
    if coef <= 2**53:
        return coef * prob
    log_coef = math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts)
    log_prob = sum(c * math.log(p) for c, p in zip(counts, probs) if c)
    return math.exp(log_coef + log_prob)


def exact_marginal_output(
    p: CategoricalDistribution,
    n: int,
    mechanism: Mechanism,
    cap: int = DEFAULT_EXACT_CAP,
) -> CategoricalDistribution:
    """Marginal output law by exact enumeration over all datasets.

    Q(y) = sum over count vectors d of pmf(d; n, p) * mechanism(d)(y). The
    result is normalized by the enumerated total mass, which removes the
    floating-point truncation of the pmf sum.
    """
    total = 0.0
    acc = np.zeros(p.k)
    for d in enumerate_count_vectors(n, p.k, cap=cap):
        weight = multinomial_pmf(d.counts, p.probs)
        if weight == 0.0:
            continue
        total += weight
        acc += weight * mechanism(d).probs
    return CategoricalDistribution(p.k, acc / total)


def _draw_count_matrix(p: np.ndarray, n: int, trials: int, stream: RandomStream) -> np.ndarray:
    """(trials, k) matrix of multinomial counts via inverse-CDF letter draws."""
    k = p.shape[0]
    cum = np.cumsum(p)
    u = stream.uniforms((trials, n))
    letters = np.minimum(np.searchsorted(cum, u, side="right"), k - 1)
    offsets = np.arange(trials, dtype=np.int64)[:, None] * k
    flat = np.bincount((letters + offsets).ravel(), minlength=trials * k)
    return flat.reshape(trials, k).astype(np.int64)


def _chunk_sizes(trials: int, chunk_size: int) -> list[int]:
    full, rest = divmod(trials, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _mc_moments(
    chunk_fn: Callable[[int, int], np.ndarray],
    trials: int,
    k: int,
    chunk_size: int,
    threads: int | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance-of-the-mean of per-trial conditional vectors.

    ``chunk_fn(i, m)`` must return the (m, k) matrix of conditional output
    vectors for chunk i, drawing only from substream i. Chunks are reduced in
    index order, so the result does not depend on the worker count.
    """
    sizes = _chunk_sizes(trials, chunk_size)
    workers = threads if threads is not None else worker_count()

    def run(args):
        i, m = args
        rows = chunk_fn(i, m)
        return rows.sum(axis=0), rows.T @ rows

    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run, jobs))
    else:
        partials = [run(job) for job in jobs]

    s1 = np.zeros(k)
    s2 = np.zeros((k, k))
    for a, b in partials:
        s1 += a
        s2 += b
    mean = s1 / trials
    if trials > 1:
        cov = (s2 - trials * np.outer(mean, mean)) / (trials - 1) / trials
    else:
        cov = np.zeros((k, k))
    return mean, cov


def mc_marginal_output(
    p: CategoricalDistribution,
    n: int,
    mechanism: Mechanism,
    trials: int,
    rng: RandomStream,
    chunk_size: int = MC_CHUNK_SIZE,
    threads: int | None = None,
) -> tuple[CategoricalDistribution, np.ndarray]:
    """Rao-Blackwellized Monte Carlo estimate of the marginal output law.

    Averages the exact conditional output vector of ``trials`` datasets drawn
    multinomially from p, and reports the per-coordinate standard error of
    that average. Chunk i of the computation draws from ``rng.substream(i)``;
    the caller's stream object is used only as a key source, so two calls
    with equal (seed, stream_id, trials, chunk_size) return identical bytes
    regardless of thread count.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    batch = getattr(mechanism, "batch", None)

    def chunk_fn(i: int, m: int) -> np.ndarray:
        stream = rng.substream(i)
        counts = _draw_count_matrix(p.probs, n, m, stream)
        if batch is not None:
            return np.asarray(batch(counts))
        return np.stack([mechanism(CountVector(p.k, row)).probs for row in counts])

    mean, cov = _mc_moments(chunk_fn, trials, p.k, chunk_size, threads)
    stderr = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return CategoricalDistribution(p.k, mean), stderr


def _tv_with_stderr(mean: np.ndarray, cov: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    """TV(mean, target) and its linearized standard error.

    TV is half of s . (mean - target) with s the sign pattern of the
    deviations, so its variance is s' cov s / 4 under the same signs.
    """
    delta = mean - target
    signs = np.sign(delta)
    tv = 0.5 * float(np.abs(delta).sum())
    var = 0.25 * float(signs @ cov @ signs)
    return tv, math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class AccuracyPoint:
    """One (epsilon, mechanism) cell of an accuracy sweep."""

    epsilon: float
    mechanism: str
    tv: float
    tv_stderr: float
    trials: int
    analytic_alpha: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.tv <= 1.0:
            raise ValueError(f"tv must lie in [0, 1], got {self.tv!r}")
        if self.tv_stderr < 0.0:
            raise ValueError("tv_stderr must be non-negative")


SWEEP_MECHANISMS = ("roo", "dsroo", "laplace")


def accuracy_sweep(
    p: CategoricalDistribution,
    n: int,
    epsilons: Sequence[float],
    mechanisms: Sequence[str] = SWEEP_MECHANISMS,
    trials: int = 100_000,
    rng: RandomStream | None = None,
    exact_cap: int = DEFAULT_EXACT_CAP,
    chunk_size: int = MC_CHUNK_SIZE,
    threads: int | None = None,
) -> list[AccuracyPoint]:
    """Measured total variation versus privacy level for each mechanism.

    The fixed-q mechanism has a closed-form marginal law and is reported
    exactly, with its analytic worst-case alpha alongside. The data-specific
    variant is enumerated exactly when the composition count is at most
    ``exact_cap`` and estimated by Rao-Blackwellized Monte Carlo otherwise.
    The Laplace route is always Monte Carlo (its conditional law has no
    closed form), averaging the projected noisy vector per trial; its
    analytic accuracy bound 2k/(n eps) is attached, vacuous or not.

    Sweep row i uses substreams rng.substream(i * STREAM_STRIDE + j) for its
    chunks j, so results are reproducible and independent of list order of
    other rows' internals.
    """
    unknown = set(mechanisms) - set(SWEEP_MECHANISMS)
    if unknown:
        raise ValueError(f"unknown mechanism tags: {sorted(unknown)}")
    needs_rng = any(tag != "roo" for tag in mechanisms)
    if needs_rng and rng is None:
        raise ValueError("a RandomStream is required for Monte Carlo mechanisms")

    points: list[AccuracyPoint] = []
    row = 0
    for eps in epsilons:
        for tag in mechanisms:
            row += 1
            if tag == "roo":
                q = roo_q_for_epsilon(eps, n, p.k)
                tv = tv_distance(roo_marginal_output(p, q), p)
                points.append(AccuracyPoint(eps, tag, tv, 0.0, 0, roo_accuracy(q, p.k)))
                continue

            row_rng = rng.substream(row * STREAM_STRIDE)
            if tag == "dsroo":
                schedule = build_schedule(eps, n, p.k)
                cond = DsRooConditional(schedule)
                if composition_count(n, p.k) <= exact_cap:
                    tv = tv_distance(exact_marginal_output(p, n, cond, cap=exact_cap), p)
                    points.append(AccuracyPoint(eps, tag, tv, 0.0, 0, None))
                    continue

                def chunk_fn(i: int, m: int, cond=cond, row_rng=row_rng) -> np.ndarray:
                    stream = row_rng.substream(i)
                    counts = _draw_count_matrix(p.probs, n, m, stream)
                    return cond.batch(counts)

                mean, cov = _mc_moments(chunk_fn, trials, p.k, chunk_size, threads)
                tv, stderr = _tv_with_stderr(mean, cov, p.probs)
                points.append(AccuracyPoint(eps, tag, tv, stderr, trials, None))
                continue

            params = LaplaceParams.for_budget(eps, n)

            def chunk_fn(i: int, m: int, params=params, row_rng=row_rng) -> np.ndarray:
                stream = row_rng.substream(i)
                counts = _draw_count_matrix(p.probs, n, m, stream)
                phat = counts / n
                u = stream.uniforms((m, p.k)) - 0.5
                noise = -params.scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
                return project_rows_to_simplex(phat + noise)

            mean, cov = _mc_moments(chunk_fn, trials, p.k, chunk_size, threads)
            tv, stderr = _tv_with_stderr(mean, cov, p.probs)
            points.append(AccuracyPoint(eps, tag, tv, stderr, trials, baseline_accuracy(p.k, n, eps)))
    return points


def reference_distribution(k: int = 9) -> CategoricalDistribution:
    """Symmetric center-peaked reference input: binomial(k - 1, 1/2) weights.

    The weights are dyadic rationals, so the vector is exact in doubles.
    """
    weights = np.array([math.comb(k - 1, i) for i in range(k)], dtype=np.float64)
    return CategoricalDistribution(k, weights / 2.0 ** (k - 1))
