"""Multi-objective consensus-based optimization."""

__version__ = "0.1.0"

from .estimator import MultiObjectiveCBO
from .metrics import err2, igd, nondominated_fraction
from .problems import (
    BoxDomain,
    Problem,
    ReferenceSolutionSet,
    clip_to_domain,
    eval_objectives,
    get_problem,
    oracle_reference_set,
    reference_front,
    sample_uniform,
    subproblem_oracle,
)
from .scalarization import evaluate_gp, generate_uniform_weights
from .solver import (
    Ensemble,
    SolverConfig,
    consensus_points,
    init_ensemble,
    run,
    step_greedy,
    step_plain,
)

__all__ = [
    "MultiObjectiveCBO",
    "BoxDomain",
    "Problem",
    "ReferenceSolutionSet",
    "Ensemble",
    "SolverConfig",
    "clip_to_domain",
    "consensus_points",
    "err2",
    "eval_objectives",
    "evaluate_gp",
    "generate_uniform_weights",
    "get_problem",
    "igd",
    "init_ensemble",
    "nondominated_fraction",
    "oracle_reference_set",
    "reference_front",
    "run",
    "sample_uniform",
    "step_greedy",
    "step_plain",
    "subproblem_oracle",
]
