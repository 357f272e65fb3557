"""Problem instances, schedules, total cost, search bounds, and arrival ordering.

The setting: ``n`` users, each with one unit of service demand, share a single
resource.  While ``q`` users are present every one of them is served at rate
``beta - alpha*(q - 1)``, so each extra user slows everybody down by ``alpha``.
A central planner picks the arrival times; user ``i`` would ideally depart at
``d_star[i]`` and pays quadratically for missing that target plus ``gamma`` per
unit of time spent in the system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Absolute tolerance for comparing event times (arrivals vs. departures).
TIME_TOL = 1e-9


class InvariantError(ValueError):
    """Caller-supplied data violates a model invariant."""


def _vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvariantError(f"{name} must be a one-dimensional vector")
    if not np.all(np.isfinite(arr)):
        raise InvariantError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class Instance:
    """One scheduling problem.

    Parameters
    ----------
    n : int
        Number of users (each with unit demand).
    alpha : float
        Slowdown per additional present user.  ``alpha = 0`` means no
        congestion at all.
    beta : float
        Free-flow service rate (rate seen by a lone user); the free-flow
        sojourn time is ``1/beta``.
    gamma : float
        Cost per unit of sojourn time.
    d_star : tuple of float
        Ideal departure times, ascending.  Unsorted input is rejected, not
        sorted silently: position ``i`` is an identity, and sorting is the
        caller's responsibility.
    """

    n: int
    alpha: float
    beta: float
    gamma: float
    d_star: tuple[float, ...]

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvariantError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        if not (self.beta > 0.0):
            raise InvariantError("beta must be positive")
        if self.alpha < 0.0:
            raise InvariantError("alpha must be nonnegative")
        if self.gamma < 0.0:
            raise InvariantError("gamma must be nonnegative")
        dstar = _vector(self.d_star, "d_star")
        if dstar.size != self.n:
            raise InvariantError("d_star must have exactly n entries")
        if np.any(np.diff(dstar) < 0.0):
            raise InvariantError("d_star not sorted")
        # Service rates must stay positive even with everybody present.
        if self.alpha * (self.n - 1) >= self.beta:
            raise InvariantError(
                "need n < beta/alpha + 1 so the rate stays positive at full occupancy"
            )
        object.__setattr__(self, "d_star", tuple(float(v) for v in dstar))

    def rate(self, q: int) -> float:
        """Per-user service rate with ``q`` users present."""
        return self.beta - self.alpha * (q - 1)

    @property
    def rate_floor(self) -> float:
        """Slowest possible per-user rate (all ``n`` users present)."""
        return self.beta - self.alpha * (self.n - 1)

    @property
    def d_star_array(self) -> np.ndarray:
        return np.asarray(self.d_star, dtype=float)


@dataclass(frozen=True)
class OrderProfile:
    """Interleaving pattern of arrivals and departures, 1-based.

    ``k[i-1]`` is the position of the last arrival at or before departure
    ``i``; ``h[i-1]`` is the earliest position whose departure is not before
    arrival ``i``.  Either vector determines the other.
    """

    k: tuple[int, ...]
    h: tuple[int, ...]

    def __post_init__(self):
        k, h = self.k, self.h
        n = len(k)
        if len(h) != n or n == 0:
            raise InvariantError("profile vectors must be nonempty and equally long")
        if k[-1] != n or h[0] != 1:
            raise InvariantError("profile must satisfy k_n = n and h_1 = 1")
        for i in range(n):
            if not (i + 1 <= k[i] <= n):
                raise InvariantError("profile needs i <= k_i <= n")
            if not (1 <= h[i] <= i + 1):
                raise InvariantError("profile needs 1 <= h_i <= i")
            if i and (k[i] < k[i - 1] or h[i] < h[i - 1]):
                raise InvariantError("profile vectors must be nondecreasing")
        # h determines k and vice versa; verify they describe one interleaving.
        if tuple(h_from_k(k)) != tuple(h):
            raise InvariantError("profile k and h are not duals of each other")

    @property
    def n(self) -> int:
        return len(self.k)


def h_from_k(k) -> list[int]:
    """Derive ``h`` from ``k``: h_i = min{h : k_h >= i}."""
    n = len(k)
    h = [0] * n
    j = 0  # 0-based candidate for h_i - 1; nondecreasing in i
    for i in range(1, n + 1):
        while k[j] < i:
            j += 1
        h[i - 1] = j + 1
    return h


def k_from_h(h) -> list[int]:
    """Derive ``k`` from ``h``: k_i = max{k : h_k <= i}."""
    n = len(h)
    k = [0] * n
    j = n - 1  # 0-based candidate for k_i - 1; nonincreasing as i decreases
    for i in range(n, 0, -1):
        while h[j] > i:
            j -= 1
        k[i - 1] = j + 1
    return k


@dataclass(frozen=True)
class Schedule:
    """Arrival times plus (optionally) the induced departures and profile."""

    arrivals: tuple[float, ...]
    departures: tuple[float, ...] | None = None
    profile: OrderProfile | None = None

    def __post_init__(self):
        a = _vector(self.arrivals, "arrivals")
        object.__setattr__(self, "arrivals", tuple(float(v) for v in a))
        if self.departures is not None:
            d = _vector(self.departures, "departures")
            if d.size != a.size:
                raise InvariantError("departures must match arrivals in length")
            if np.any(d <= a):
                raise InvariantError("every departure must come after its arrival")
            object.__setattr__(self, "departures", tuple(float(v) for v in d))

    @property
    def n(self) -> int:
        return len(self.arrivals)


def total_cost(instance: Instance, schedule: Schedule) -> float:
    """Total cost: sum of (d_i - d_star_i)^2 + gamma * (d_i - a_i).

    Pairs position ``i`` of the schedule with ``d_star[i]``; use sorted
    arrivals (see :func:`order`) unless you mean a nonstandard pairing.
    """
    if schedule.departures is None:
        raise InvariantError("total_cost needs a schedule with departures")
    a = np.asarray(schedule.arrivals)
    d = np.asarray(schedule.departures)
    dev = d - instance.d_star_array
    return float(dev @ dev + instance.gamma * np.sum(d - a))


def bounds(instance: Instance) -> tuple[float, float]:
    """Search interval [a_lo, a_hi] that contains every optimal schedule.

    The margin n/(beta - alpha*(n-1)) is the longest time any schedule of n
    users can take to fully drain, so arriving before a_lo (after a_hi) is
    dominated by shifting right (left).
    """
    margin = instance.n / instance.rate_floor
    return instance.d_star[0] - margin, instance.d_star[-1] + margin


def order(a) -> np.ndarray:
    """Ascending sort of an arrival vector (never increases total cost)."""
    return np.sort(np.asarray(a, dtype=float), kind="stable")
