"""Centralized arrival scheduling for a shared service with linear slowdown."""

from .model import (
    TIME_TOL,
    Instance,
    InvariantError,
    OrderProfile,
    Schedule,
    bounds,
    h_from_k,
    k_from_h,
    order,
    total_cost,
)
from .dynamics import (
    DynamicsResult,
    build_matrices,
    evaluate_cost,
    forward_dynamics,
    inverse_dynamics,
    simulate_oracle,
)
from .qp import (
    QPSolution,
    affine_map,
    feasible_point,
    membership,
    polytope_constraints,
    quadratic_form,
    solve_convex_qp,
    solve_qp,
)
from .exhaustive import (
    ExhaustiveResult,
    catalan,
    enumerate_profiles,
    exhaustive_search,
)
from .neighbour import NeighbourResult, active_index_sets, neighbour_search
from .linesearch import CPIResult, LineSearchResult, cpi, line_search
from .heuristic import (
    CombinedResult,
    combined_search,
    initial_points,
    solve_gamma_inf,
    solve_gamma_zero,
)
from .bench import (
    CellResult,
    ExperimentSpec,
    generate_instance,
    normal_quantile,
    run_experiment,
)

__all__ = [
    "TIME_TOL",
    "Instance",
    "InvariantError",
    "OrderProfile",
    "Schedule",
    "bounds",
    "h_from_k",
    "k_from_h",
    "order",
    "total_cost",
    "DynamicsResult",
    "build_matrices",
    "evaluate_cost",
    "forward_dynamics",
    "inverse_dynamics",
    "simulate_oracle",
    "QPSolution",
    "affine_map",
    "feasible_point",
    "membership",
    "polytope_constraints",
    "quadratic_form",
    "solve_convex_qp",
    "solve_qp",
    "ExhaustiveResult",
    "catalan",
    "enumerate_profiles",
    "exhaustive_search",
    "NeighbourResult",
    "active_index_sets",
    "neighbour_search",
    "CPIResult",
    "LineSearchResult",
    "cpi",
    "line_search",
    "CombinedResult",
    "combined_search",
    "initial_points",
    "solve_gamma_inf",
    "solve_gamma_zero",
    "CellResult",
    "ExperimentSpec",
    "generate_instance",
    "normal_quantile",
    "run_experiment",
]
