"""Differentially private single-sample release for discrete distributions.

Mechanisms release one representative letter from a dataset of categorical
observations under a pure epsilon-DP guarantee, either with a fixed obscuring
probability or with one adapted to the dataset's smallest per-letter count.
The package also ships the Laplace-projection baseline, an exhaustive privacy
auditor, exact and Monte-Carlo utility measurement, and dataset-size
comparison tooling, all behind a reproducible seeded randomness contract.
"""

__version__ = "0.1.0"

from .analysis import (
    AccuracyPoint,
    AuditReport,
    accuracy_sweep,
    audit_mechanism,
    composition_count,
    enumerate_count_vectors,
    exact_marginal_output,
    mc_marginal_output,
    multinomial_pmf,
    neighbors,
    reference_distribution,
)
from .baseline import (
    ComplexityComparison,
    LaplaceParams,
    baseline_accuracy,
    baseline_sampling_complexity,
    complexity_comparison,
    laplace_sample,
    project_to_simplex,
    subrr_sampling_complexity,
)
from .core import (
    CategoricalDistribution,
    CountVector,
    PrivacyBudget,
    RandomStream,
    draw_bernoulli,
    draw_from_counts,
    draw_uniform_letter,
    empirical_distribution,
    min_count,
    tv_distance,
)
from .dsroo import (
    FeasibilityReport,
    FeasibilityViolation,
    QSchedule,
    ScheduleCoefficients,
    build_schedule,
    check_feasibility,
    coefficients,
    dsroo_conditional_output,
    dsroo_sample,
    t_lower_bound,
)
from .roo import (
    RooParams,
    required_dataset_size,
    roo_accuracy,
    roo_conditional_output,
    roo_epsilon,
    roo_marginal_output,
    roo_q_for_epsilon,
    roo_sample,
    roo_sampling_complexity,
)

__all__ = [
    "AccuracyPoint",
    "AuditReport",
    "CategoricalDistribution",
    "ComplexityComparison",
    "CountVector",
    "FeasibilityReport",
    "FeasibilityViolation",
    "LaplaceParams",
    "PrivacyBudget",
    "QSchedule",
    "RandomStream",
    "RooParams",
    "ScheduleCoefficients",
    "accuracy_sweep",
    "audit_mechanism",
    "baseline_accuracy",
    "baseline_sampling_complexity",
    "build_schedule",
    "check_feasibility",
    "coefficients",
    "complexity_comparison",
    "composition_count",
    "draw_bernoulli",
    "draw_from_counts",
    "draw_uniform_letter",
    "dsroo_conditional_output",
    "dsroo_sample",
    "empirical_distribution",
    "enumerate_count_vectors",
    "exact_marginal_output",
    "laplace_sample",
    "mc_marginal_output",
    "min_count",
    "multinomial_pmf",
    "neighbors",
    "project_to_simplex",
    "reference_distribution",
    "required_dataset_size",
    "roo_accuracy",
    "roo_conditional_output",
    "roo_epsilon",
    "roo_marginal_output",
    "roo_q_for_epsilon",
    "roo_sample",
    "roo_sampling_complexity",
    "subrr_sampling_complexity",
    "t_lower_bound",
    "tv_distance",
]
