"""Data-specific reveal-or-obscure: the obscuring probability depends on m,
the smallest per-letter count of the dataset.

A schedule (q_0, ..., q_floor(n/k)) is precomputed once per (epsilon, n, k).
Index 0 matches the fixed-q mechanism, so datasets missing a letter get the
same treatment; larger m means the data look closer to uniform and less
obscuring is needed. Privacy of the data-dependent parameter choice rests on
three inequality families relating consecutive schedule entries, exposed here
through ``check_feasibility`` and verified exhaustively by the auditor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import CategoricalDistribution, CountVector, RandomStream, min_count
from .roo import roo_conditional_output, roo_q_for_epsilon, roo_sample


@dataclass(frozen=True)
class ScheduleCoefficients:
    """The linear-constraint coefficients (u, v, w) at min-count index m."""

    m: int
    u: float
    v: float
    w: float


def coefficients(m: int, n: int, k: int, epsilon: float) -> ScheduleCoefficients:
    """Constraint coefficients for index m:

        u = -m/n + 1/k - 1/n
        v = e^eps (1/k - m/n)
        w = -1/n - m/n + (m/n) e^eps

    v is non-negative, and zero exactly when m = n/k (only possible if k
    divides n).
    """
    if not 0 <= m <= n // k:
        raise ValueError(f"m must lie in [0, {n // k}], got {m}")
    e = math.exp(epsilon)
    u = -(m / n) + 1.0 / k - 1.0 / n
    v = e * (1.0 / k - m / n)
    w = -(1.0 / n) - m / n + (m / n) * e
    return ScheduleCoefficients(m, u, v, w)


def t_lower_bound(m: int, n: int, k: int, epsilon: float) -> float:
    """Feasibility threshold w_m / (u_m - v_m) for same-min-count neighbors.

    Computed in the cancellation-free form (1 - m(e^eps - 1)) /
    ((n/k - m)(e^eps - 1) + 1); at m = 0 this is exactly the value that
    inverts the fixed-q privacy formula. The sequence is strictly decreasing
    in m and becomes negative once m exceeds 1/(e^eps - 1).
    """
    if not 0 <= m <= n // k:
        raise ValueError(f"m must lie in [0, {n // k}], got {m}")
    em1 = math.expm1(epsilon)
    return (1.0 - m * em1) / ((n / k - m) * em1 + 1.0)


@dataclass(frozen=True, eq=False)
class QSchedule:
    """Obscuring probabilities indexed by min count m = 0 ... floor(n/k).

    ``build_schedule`` guarantees the schedule invariants (entries in [0, 1],
    non-increasing, index 0 matching the fixed-q value); instances built by
    hand may violate them, which is what ``check_feasibility`` is for.
    """

    epsilon: float
    n: int
    k: int
    q: np.ndarray

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a positive finite real, got {self.epsilon!r}")
        if self.k < 2 or self.n < 1:
            raise ValueError("need k >= 2 and n >= 1")
        q = np.asarray(self.q, dtype=np.float64)
        if q.shape != (self.n // self.k + 1,):
            raise ValueError(
                f"schedule must have floor(n/k)+1 = {self.n // self.k + 1} entries, got {q.shape}"
            )
        if not np.all(np.isfinite(q)):
            raise ValueError("schedule entries must be finite")
        q = q.copy()
        q.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))

    @property
    def max_min_count(self) -> int:
        return self.n // self.k


@lru_cache(maxsize=None)
def build_schedule(epsilon: float, n: int, k: int) -> QSchedule:
    """Construct the schedule for (epsilon, n, k); cached per exact triple.

    Entry 0 comes from the fixed-q inversion. Later entries follow the
    recursion q_m = max{0, (u_m/v_m) q_{m-1} - w_m/v_m} with two guards:

    * v_m = 0 (m = n/k with k | n): the recursion is undefined there and the
      schedule is pinned to 0. The exactly-uniform dataset is the only one
      with that min count, so it has no same-min-count neighbors, and the
      remaining neighbor constraints still hold (audited exhaustively).
    * The entry is floored at ``t_lower_bound``. For short schedules
      (floor(n/k) within the range where that threshold is positive) the bare
      recursion dips below it at the last index, which breaks the privacy
      guarantee for same-min-count neighbor pairs; the floor restores it
      without affecting any index where the recursion already satisfies the
      threshold, and in particular is a no-op whenever floor(n/k) exceeds
      1/(e^eps - 1).

    Once an entry reaches 0 the remainder is pinned to 0.
    """
    q0 = roo_q_for_epsilon(epsilon, n, k)
    qs = [q0]
    for m in range(1, n // k + 1):
        prev = qs[-1]
        if prev == 0.0:
            qs.append(0.0)
            continue
        c = coefficients(m, n, k, epsilon)
        if c.v == 0.0:
            qs.append(0.0)
            continue
        value = (c.u / c.v) * prev - c.w / c.v
        qs.append(max(0.0, value, t_lower_bound(m, n, k, epsilon)))
    return QSchedule(epsilon, n, k, np.array(qs, dtype=np.float64))


def dsroo_conditional_output(d: CountVector, s: QSchedule) -> CategoricalDistribution:
    """Exact output law q_m/k + (1 - q_m) * phat with m = min count of d."""
    _check_match(d, s)
    return roo_conditional_output(d, float(s.q[min_count(d)]))


def dsroo_sample(d: CountVector, s: QSchedule, rng: RandomStream) -> int:
    """One release with the obscuring probability looked up from min count."""
    _check_match(d, s)
    return roo_sample(d, float(s.q[min_count(d)]), rng)


def _check_match(d: CountVector, s: QSchedule) -> None:
    if d.k != s.k:
        raise ValueError(f"alphabet mismatch: dataset k={d.k}, schedule k={s.k}")
    if d.n != s.n:
        raise ValueError(f"size mismatch: dataset n={d.n}, schedule n={s.n}")


@dataclass(frozen=True)
class FeasibilityViolation:
    condition: str
    m: int
    lhs: float
    rhs: float

    def __str__(self):
        return f"{self.condition} at m={self.m}: {self.lhs!r} vs {self.rhs!r}"


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    checks: int
    violations: tuple[FeasibilityViolation, ...] = field(default_factory=tuple)

    def __str__(self):
        if self.ok:
            return f"feasible ({self.checks} checks)"
        lines = [f"{len(self.violations)} violation(s) in {self.checks} checks:"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


def check_feasibility(s: QSchedule, tol: float = 1e-10) -> FeasibilityReport:
    """Verify the privacy inequalities and shape invariants of a schedule.

    Checks, with slack ``tol``:

    * ``q_lower_bound``: q_m >= w_m/(u_m - v_m) for m up to
      min(floor(1/(e^eps - 1)), floor(n/k)), the range where the threshold is
      positive. The v_m = 0 index is skipped: exactly one dataset attains
      that min count, so the same-min-count constraint is vacuous there.
    * ``raise_min_count``: u_m q_{m+1} <= v_m q_m + w_m for m < floor(n/k).
    * ``lower_min_count``: u_m q_{m-1} <= v_m q_m + w_m for m >= 1.
    * ``non_increasing`` and ``unit_interval`` shape invariants.

    Violations are report entries, never exceptions.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    top = s.max_min_count
    q = s.q
    coef = [coefficients(m, s.n, s.k, s.epsilon) for m in range(top + 1)]
    violations: list[FeasibilityViolation] = []
    checks = 0

    em1 = math.expm1(s.epsilon)
    bound_top = min(int(1.0 / em1), top) if math.isfinite(em1) else 0
    for m in range(bound_top + 1):
        c = coef[m]
        if c.v == 0.0:
            continue
        checks += 1
        threshold = c.w / (c.u - c.v)
        if q[m] < threshold - tol:
            violations.append(FeasibilityViolation("q_lower_bound", m, float(q[m]), threshold))

    for m in range(top):
        c = coef[m]
        checks += 1
        lhs = c.u * q[m + 1]
        rhs = c.v * q[m] + c.w
        if lhs > rhs + tol:
            violations.append(FeasibilityViolation("raise_min_count", m, lhs, rhs))

    for m in range(1, top + 1):
        c = coef[m]
        checks += 1
        lhs = c.u * q[m - 1]
        rhs = c.v * q[m] + c.w
        if lhs > rhs + tol:
            violations.append(FeasibilityViolation("lower_min_count", m, lhs, rhs))

    for m in range(1, top + 1):
        checks += 1
        if q[m] > q[m - 1] + tol:
            violations.append(FeasibilityViolation("non_increasing", m, float(q[m]), float(q[m - 1])))

    for m in range(top + 1):
        checks += 1
        if not (-tol <= q[m] <= 1.0 + tol):
            violations.append(FeasibilityViolation("unit_interval", m, float(q[m]), 1.0))

    return FeasibilityReport(ok=not violations, checks=checks, violations=tuple(violations))


class DsRooConditional:
    """Callable dataset -> exact output law, with a vectorized batch path."""

    def __init__(self, s: QSchedule):
        self.schedule = s

    def __call__(self, d: CountVector) -> CategoricalDistribution:
        return dsroo_conditional_output(d, self.schedule)

    def batch(self, counts: np.ndarray) -> np.ndarray:
        """Rows of conditional output laws for a (trials, k) count matrix."""
        counts = np.asarray(counts)
        s = self.schedule
        qm = s.q[counts.min(axis=1)][:, None]
        return qm / s.k + (1.0 - qm) * (counts / s.n)
