"""Exact solvers, verification oracles, and dispatch simulation for
same-day delivery routing with release dates, deadline options, and
pickup stations."""

from .core import (
    ConfigError,
    Geometry,
    Instance,
    InvalidInstanceError,
    Location,
    MalformedInputError,
    OptionSet,
    Order,
    ReleaseDist,
    SddError,
    SizeGuardError,
    Station,
    distance_matrix,
    feasible_stations,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    save_instance,
    validate_instance,
)
from .dynamics import (
    Action,
    EpisodeResult,
    Policy,
    ProtocolViolationError,
    Scenario,
    SimConfig,
    SimReport,
    policy_decide,
    run_episode,
    sample_scenario,
    simulate,
)
from .generator import GeneratorProfile, gen_instance
from .oracle import OracleGuard, oracle_solve
from .plans import (
    MetricsReport,
    OrderAssignment,
    Plan,
    PlanError,
    Trip,
    Violation,
    compute_metrics,
    eval_objective,
    load_plan,
    save_plan,
    validate_plan,
)
from .solvers import (
    SlotSolution,
    SolveReport,
    SolverConfig,
    solve_f1,
    solve_f2,
    solve_f2_lex,
    solve_f3,
    solve_f4,
    tsp_exact,
)

__version__ = "0.1.0"
