"""Robust optimization toolkit for unconstrained binary quadratic problems."""

from .design import (
    DesignMatrix,
    DifferenceSet,
    ScenarioGenerators,
    average_instance,
    build_design,
    differing_elements,
    instantiate_scenario,
    perturbed_generators,
    random_scenario,
    run_count,
)
from .pipeline import (
    PoolEntry,
    RobustnessReport,
    ScenarioResult,
    coverage,
    most_robust,
    run_robust_analysis,
)
from .preprocess import (
    FixReport,
    SensitivityRecord,
    SensitivityReport,
    fix_slack,
    fix_variables,
    pair_slack,
    reduce_instance,
    sensitivity_report,
)
from .qubo import (
    BinarySolution,
    ParseError,
    QuboInstance,
    evaluate,
    format_instance,
    parse_instance,
    positive_sum_bound,
)
from .response_surface import (
    BoundComparison,
    BoundRow,
    SurfaceModel,
    code_scenario,
    compare_bounds,
    estimate,
    fit_model,
    upper_bound,
)
from .solver import (
    SolveOutcome,
    SolverConfig,
    one_flip_gain,
    solve,
    solve_exact,
    solve_heuristic,
)

__version__ = "0.1.0"

__all__ = [
    "BinarySolution",
    "BoundComparison",
    "BoundRow",
    "DesignMatrix",
    "DifferenceSet",
    "FixReport",
    "ParseError",
    "PoolEntry",
    "QuboInstance",
    "RobustnessReport",
    "ScenarioGenerators",
    "ScenarioResult",
    "SensitivityRecord",
    "SensitivityReport",
    "SolveOutcome",
    "SolverConfig",
    "SurfaceModel",
    "average_instance",
    "build_design",
    "code_scenario",
    "compare_bounds",
    "coverage",
    "differing_elements",
    "estimate",
    "evaluate",
    "fit_model",
    "fix_slack",
    "fix_variables",
    "format_instance",
    "instantiate_scenario",
    "most_robust",
    "one_flip_gain",
    "pair_slack",
    "parse_instance",
    "perturbed_generators",
    "positive_sum_bound",
    "random_scenario",
    "reduce_instance",
    "run_count",
    "run_robust_analysis",
    "sensitivity_report",
    "solve",
    "solve_exact",
    "solve_heuristic",
    "upper_bound",
]
