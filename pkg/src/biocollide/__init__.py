"""Collision probabilities for quantized biometric feature spaces.

``n`` individuals are assigned independently and uniformly to ``m`` cells
(``m = q**k`` for ``k`` features with ``q`` levels each). The package evaluates
how likely two of them are to share a cell, at scales like ``m = 10**44`` and
``n = 10**10``.
"""

from .collision import (
    ApproxMethod,
    MetricResult,
    UnboundedError,
    exact_match_prob,
    expected_pair_trials,
    expected_population_redraws,
    expected_redistributions_exact,
    match_cohort_size,
    pair_match_prob,
    population_match_prob,
)
from .model import (
    CatalogError,
    FeatureCatalog,
    FeatureSpec,
    PopulationModel,
    builtin_catalog,
    heterogeneous_log_m,
    load_catalog,
    serialize_catalog,
    uniform_catalog,
)
from .numerics import AccuracyError, DomainError, ExtReal, Probability
from .oracle import Metric, SimEstimate, WorkBudgetError, exact_population_match_small, simulate
from .report import CollisionReport, build_report, format_value, sweep_match_at_p, table2

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ApproxMethod",
    "CatalogError",
    "CollisionReport",
    "DomainError",
    "ExtReal",
    "FeatureCatalog",
    "FeatureSpec",
    "Metric",
    "MetricResult",
    "PopulationModel",
    "Probability",
    "SimEstimate",
    "UnboundedError",
    "WorkBudgetError",
    "build_report",
    "builtin_catalog",
    "exact_match_prob",
    "exact_population_match_small",
    "expected_pair_trials",
    "expected_population_redraws",
    "expected_redistributions_exact",
    "format_value",
    "heterogeneous_log_m",
    "load_catalog",
    "match_cohort_size",
    "pair_match_prob",
    "population_match_prob",
    "serialize_catalog",
    "simulate",
    "sweep_match_at_p",
    "table2",
    "uniform_catalog",
]
