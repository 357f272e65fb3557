"""Deterministic instance families and the benchmark harness.

Instances take their ideal departures from the quantiles of a centered
normal distribution, with the congestion coefficient shrinking as 0.8/n so
any number of users stays feasible.  The harness runs the combined search
(and optionally the exhaustive solver) over an (n, gamma) grid and emits
plot-ready CSV tables.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import forward_dynamics
from .exhaustive import exhaustive_search
from .heuristic import combined_search
from .model import Instance

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# rational minimax coefficients for the initial inverse-CDF guess
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_quantile(p: float, mu: float = 0.0, sigma: float = 1.0) -> float:
    """Inverse normal CDF: rational first guess plus one Halley correction.

    Parameters
    ----------
    p : float
        Probability in the open interval (0, 1).
    mu, sigma : float
        Location and scale of the distribution.

    Returns
    -------
    float
        The value x with P(X <= x) = p, accurate to well below 1e-9.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("probability must lie strictly between 0 and 1")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q
             + _C[5]) / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = ((((( _A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r
             + _A[5]) * q / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r
             + _B[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q
              + _C[5]) / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    # one Halley step against the exact CDF, evaluated on whichever tail
    # keeps the residual well scaled
    if x <= 0.0:
        err = 0.5 * math.erfc(-x / _SQRT2) - p
    else:
        err = (1.0 - p) - 0.5 * math.erfc(x / _SQRT2)
    u = err * _SQRT_2PI * math.exp(0.5 * x * x)
    x -= u / (1.0 + 0.5 * x * u)
    return mu + sigma * x


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of an (n, gamma) benchmark grid.

    The ideal departures are normal quantiles at positions i/(n+1) (or the
    midpoint convention (i-1/2)/n), scale either fixed or growing linearly
    with n; the congestion coefficient is ``alpha_over_n / n``.
    """

    n_values: tuple[int, ...]
    gamma_values: tuple[float, ...]
    beta: float = 1.0
    alpha_over_n: float = 0.8
    sigma: float = 0.5
    sigma_scales_with_n: bool = False
    quantile_positions: str = "over-n-plus-1"
    M: int = 3
    epsilon: float = 1e-3
    include_exhaustive: bool = False

    def __post_init__(self):
        if self.quantile_positions not in ("over-n-plus-1", "midpoint"):
            raise ValueError("unknown quantile position convention")
        if any(n < 1 for n in self.n_values):
            raise ValueError("user counts must be positive")


def generate_instance(spec: ExperimentSpec, n: int, gamma: float) -> Instance:
    """Deterministic instance for one grid cell of ``spec``."""
    sigma = spec.sigma * n if spec.sigma_scales_with_n else spec.sigma
    if spec.quantile_positions == "over-n-plus-1":
        positions = [(i + 1) / (n + 1) for i in range(n)]
    else:
        positions = [(i + 0.5) / n for i in range(n)]
    d_star = tuple(normal_quantile(p, 0.0, sigma) for p in positions)
    return Instance(
        n=n,
        alpha=spec.alpha_over_n / n,
        beta=spec.beta,
        gamma=gamma,
        d_star=d_star,
    )


@dataclass(frozen=True)
class CellResult:
    """One grid cell's outcome: winning schedule plus solver diagnostics."""

    n: int
    gamma: float
    beta: float
    value: float
    cpi_cycles: int
    breakpoints_total: int
    ns_qps: int
    start_index: int
    wall_time: float
    exhaustive_value: float | None
    profiles_total: int | None
    exhaustive_qps: int | None
    arrivals: tuple[float, ...]
    departures: tuple[float, ...]
    ideal: tuple[float, ...]


def _run_cell(args) -> CellResult:
    spec, n, gamma = args
    inst = generate_instance(spec, n, gamma)
    tic = time.perf_counter()
    res = combined_search(inst, M=spec.M, epsilon=spec.epsilon)
    wall = time.perf_counter() - tic
    winner = res.reports[res.start_index]
    ex_value = profiles = ex_qps = None
    if spec.include_exhaustive:
        ex = exhaustive_search(inst)
        ex_value = ex.value
        profiles = ex.profiles_total
        ex_qps = ex.qps_solved
    dyn = forward_dynamics(inst, res.arrivals)
    return CellResult(
        n=n,
        gamma=gamma,
        beta=inst.beta,
        value=res.value,
        cpi_cycles=winner.cpi_cycles,
        breakpoints_total=sum(winner.breakpoints.values()),
        ns_qps=winner.qps_solved,
        start_index=res.start_index,
        wall_time=wall,
        exhaustive_value=ex_value,
        profiles_total=profiles,
        exhaustive_qps=ex_qps,
        arrivals=tuple(dyn.arrivals),
        departures=tuple(dyn.departures),
        ideal=tuple(inst.d_star),
    )


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> list[CellResult]:
    """Run every (n, gamma) cell of the grid; cells are independent.

    With ``threads`` above one the cells are distributed over worker
    processes; results are returned in grid order either way.
    """
    cells = [(spec, n, g) for n in spec.n_values for g in spec.gamma_values]
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_run_cell, cells))
    return [_run_cell(c) for c in cells]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_summary_csv(path, results: list[CellResult]) -> None:
    """Grid summary, one row per cell, solver diagnostics as columns."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([
            "n", "gamma", "value", "cpi_cycles", "breakpoints_total",
            "ns_qps", "start_index", "wall_time",
            "exhaustive_value", "profiles_total", "exhaustive_qps", "global_opt",
        ])
        for r in results:
            match = ""
            if r.exhaustive_value is not None:
                gap = abs(r.value - r.exhaustive_value)
                match = "yes" if gap <= 1e-6 * (1.0 + abs(r.exhaustive_value)) else "no"
            w.writerow([
                _fmt(r.n), _fmt(r.gamma), _fmt(r.value), _fmt(r.cpi_cycles),
                _fmt(r.breakpoints_total), _fmt(r.ns_qps), _fmt(r.start_index),
                _fmt(r.wall_time), _fmt(r.exhaustive_value),
                _fmt(r.profiles_total), _fmt(r.exhaustive_qps), match,
            ])


def write_diagram_csv(path, result: CellResult) -> None:
    """Per-user schedule geometry for one cell, plot-ready."""
    free_flow = 1.0 / result.beta
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user", "arrival", "free_flow_departure", "departure",
                    "ideal_departure"])
        for i in range(result.n):
            w.writerow([
                str(i + 1),
                _fmt(result.arrivals[i]),
                _fmt(result.arrivals[i] + free_flow),
                _fmt(result.departures[i]),
                _fmt(result.ideal[i]),
            ])


def write_schedule_csv(path, arrivals, departures, ideal) -> None:
    """Solved schedule table: per-user times and cost split."""
    arrivals = np.asarray(arrivals, dtype=float)
    departures = np.asarray(departures, dtype=float)
    ideal = np.asarray(ideal, dtype=float)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user", "arrival", "departure", "ideal_departure",
                    "sojourn", "deviation_cost"])
        for i in range(arrivals.size):
            w.writerow([
                str(i + 1),
                _fmt(arrivals[i]),
                _fmt(departures[i]),
                _fmt(ideal[i]),
                _fmt(departures[i] - arrivals[i]),
                _fmt((departures[i] - ideal[i]) ** 2),
            ])
