"""Configuration planning for distributed speculative LLM serving.

Evaluates every (draft model, quantisation, speculative length) combination
from measured edge-device profiles under three objectives -- goodput,
verification cost efficiency, and drafting energy per accepted token --
selects per-objective optima, computes speed-energy Pareto fronts, and
cross-validates the analytical round model against a token-level Monte
Carlo simulator.
"""

from .acceptance import (
    GeometricCurve,
    TabulatedCurve,
    alpha_geometric,
    alpha_tabulated,
    expected_accepted,
    fit_beta,
)
from .errors import (
    DomainError,
    DuplicateKeyError,
    InfeasibleObjectiveError,
    IntegrityError,
    MalformedRowError,
    MissingInputError,
    NoPowerDataError,
    NotFoundError,
    SpecPlanError,
    UndefinedCostError,
)
from .metrics import (
    ConfigTriple,
    MetricsTriple,
    analytical_triple,
    cost_efficiency,
    energy_per_token,
    evaluate_config,
    goodput,
)
from .planner import (
    EvaluatedConfig,
    Objective,
    ParetoPoint,
    Recommendation,
    Report,
    build_report,
    enumerate_configs,
    iso_power_samples,
    pareto_front,
    select_best,
)
from .profiles import (
    AcceptancePoint,
    DevicePlatform,
    DraftModel,
    ProfileStore,
    VariantProfile,
    VerifierSpec,
    Violation,
    load_profiles,
    lookup_variant,
    serialize,
    validate,
)
from .simulator import (
    EmpiricalMetrics,
    MetricDelta,
    RoundOutcome,
    SimParams,
    compare_to_analytical,
    round_rng,
    simulate_round,
    simulate_rounds,
    simulate_session,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptancePoint",
    "ConfigTriple",
    "DevicePlatform",
    "DomainError",
    "DraftModel",
    "DuplicateKeyError",
    "EmpiricalMetrics",
    "EvaluatedConfig",
    "GeometricCurve",
    "InfeasibleObjectiveError",
    "IntegrityError",
    "MalformedRowError",
    "MetricDelta",
    "MetricsTriple",
    "MissingInputError",
    "NoPowerDataError",
    "NotFoundError",
    "Objective",
    "ParetoPoint",
    "ProfileStore",
    "Recommendation",
    "Report",
    "RoundOutcome",
    "SimParams",
    "SpecPlanError",
    "TabulatedCurve",
    "UndefinedCostError",
    "VariantProfile",
    "VerifierSpec",
    "Violation",
    "alpha_geometric",
    "alpha_tabulated",
    "analytical_triple",
    "build_report",
    "compare_to_analytical",
    "cost_efficiency",
    "energy_per_token",
    "enumerate_configs",
    "evaluate_config",
    "expected_accepted",
    "fit_beta",
    "goodput",
    "iso_power_samples",
    "load_profiles",
    "lookup_variant",
    "pareto_front",
    "round_rng",
    "select_best",
    "serialize",
    "simulate_round",
    "simulate_rounds",
    "simulate_session",
    "validate",
]
