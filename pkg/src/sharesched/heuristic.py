"""Starting schedules for the extreme cost weights, and the combined search.

When the sojourn weight is zero the problem has a closed form: ask for the
ideal departures and read the arrivals off the inverse dynamics.  When the
sojourn weight dominates everything, overlap is never worth it and the best
schedule spaces arrivals a free-flow sojourn apart, as close to the ideal
departures as that spacing allows.  The combined search runs cyclic
coordinate descent from a few blends of those two extremes and polishes each
outcome with the adjacent-interleaving descent, keeping the best.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import evaluate_cost, forward_dynamics, inverse_dynamics
from .linesearch import BREAKPOINT_KINDS, cpi
from .model import Instance, OrderProfile
from .neighbour import neighbour_search
from .qp import solve_convex_qp


def solve_gamma_zero(instance: Instance) -> np.ndarray:
    """Arrival vector whose departures equal the ideal departures exactly.

    With a zero sojourn weight this is globally optimal: the quadratic
    deviation term vanishes and nothing else is charged.
    """
    return np.asarray(inverse_dynamics(instance, instance.d_star_array).arrivals)


def solve_gamma_inf(instance: Instance) -> np.ndarray:
    """Best non-overlapping schedule: free-flow sojourns, nearest departures.

    Minimizes the squared departure deviation over arrival vectors spaced at
    least one free-flow sojourn apart, so every user runs at full rate and
    the sojourn total hits its floor.  This is the limiting optimum as the
    sojourn weight grows without bound.
    """
    n = instance.n
    beta = instance.beta
    target = instance.d_star_array - 1.0 / beta
    Q = np.eye(n)
    b = -2.0 * target
    G = np.zeros((max(n - 1, 0), n))
    g = np.full(max(n - 1, 0), 1.0 / beta)
    for i in range(n - 1):
        G[i, i] = -1.0
        G[i, i + 1] = 1.0
    x0 = np.array([target.min() - (n - 1 - i) / beta for i in range(n)])
    x, _, _, _ = solve_convex_qp(Q, b, G, g, x0)
    return x


def initial_points(instance: Instance, M: int) -> list[np.ndarray]:
    """Blends of the two extreme-weight schedules, heavy-overlap end first.

    A single point means the zero-weight arrivals alone; otherwise the list
    walks the segment from the spaced-out schedule to the overlapping one.
    """
    if M < 1:
        raise ValueError("need at least one starting point")
    a_zero = solve_gamma_zero(instance)
    if M == 1:
        return [a_zero]
    a_inf = solve_gamma_inf(instance)
    return [
        (1.0 - t) * a_inf + t * a_zero for t in np.linspace(0.0, 1.0, M)
    ]


@dataclass(frozen=True)
class StartReport:
    """Per-start diagnostics of the combined search."""

    start_index: int
    cpi_cycles: int
    cpi_value: float
    breakpoints: dict[str, int]
    segments: int
    qps_solved: int
    moves: int
    value: float


@dataclass(frozen=True)
class CombinedResult:
    arrivals: np.ndarray
    value: float
    profile: OrderProfile
    start_index: int
    reports: tuple[StartReport, ...]
    certificate: tuple[float, ...]


def combined_search(
    instance: Instance,
    M: int = 3,
    epsilon: float = 1e-3,
) -> CombinedResult:
    """Coordinate descent from ``M`` starts, each polished by interleaving moves.

    Every start runs the cyclic sweep to within ``epsilon`` per cycle, then
    the adjacent-interleaving descent from the sweep's final ordering.  The
    best polished value wins; ties keep the earliest start.
    """
    best = None
    reports: list[StartReport] = []
    for idx, start in enumerate(initial_points(instance, M)):
        sweep = cpi(instance, start, epsilon=epsilon)
        profile = forward_dynamics(instance, sweep.arrivals).profile
        polish = neighbour_search(instance, profile, start=sweep.arrivals)
        reports.append(
            StartReport(
                start_index=idx,
                cpi_cycles=sweep.cycles,
                cpi_value=sweep.value,
                breakpoints=dict(sweep.breakpoints),
                segments=sweep.segments,
                qps_solved=polish.qps_solved,
                moves=polish.moves,
                value=polish.value,
            )
        )
        if best is None or polish.value < best[1].value:
            best = (idx, polish)
    idx, polish = best
    return CombinedResult(
        arrivals=polish.arrivals,
        value=polish.value,
        profile=polish.profile,
        start_index=idx,
        reports=tuple(reports),
        certificate=polish.certificate,
    )
