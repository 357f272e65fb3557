"""Local search over interleavings by single-coordinate overlap moves.

At a per-interleaving optimum the binding polytope faces say which departures
touch a neighbouring arrival; nudging the overlap count of one such user by
one gives the adjacent interleavings.  First-improvement descent over those
neighbours terminates at an interleaving whose whole neighbourhood is no
better — a certified local minimum of the piecewise-quadratic landscape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Instance, OrderProfile, h_from_k
from .qp import ACTIVITY_TOL, affine_map, solve_qp

#: a neighbour must beat the incumbent by more than this to trigger a move
IMPROVE_TOL = 1e-10


def active_index_sets(
    instance: Instance, profile: OrderProfile, arrivals, tol: float = ACTIVITY_TOL
) -> tuple[list[int], list[int]]:
    """Users whose departure touches the next arrival (I1) or their last
    overlapped arrival (I2), at the given arrival vector."""
    theta, eta = affine_map(instance, profile)
    a = np.asarray(arrivals, dtype=float)
    d = theta @ a + eta
    n = instance.n
    I1 = [
        i
        for i in range(1, n + 1)
        if profile.k[i - 1] < n and abs(d[i - 1] - a[profile.k[i - 1]]) <= tol
    ]
    I2 = [
        i
        for i in range(1, n + 1)
        if abs(d[i - 1] - a[profile.k[i - 1] - 1]) <= tol
    ]
    return I1, I2


def _valid_k(k: list[int]) -> bool:
    n = len(k)
    if k[-1] != n:
        return False
    prev = 1
    for i, v in enumerate(k, start=1):
        if v < i or v > n or v < prev:
            return False
        prev = v
    return True


@dataclass(frozen=True)
class NeighbourResult:
    arrivals: np.ndarray
    value: float
    profile: OrderProfile
    values: tuple[float, ...]
    qps_solved: int
    moves: int
    certificate: tuple[float, ...]


def neighbour_search(
    instance: Instance, profile: OrderProfile, start=None
) -> NeighbourResult:
    """First-improvement descent across adjacent interleavings.

    Solves the QP on ``profile`` (optionally warm-started at ``start``), then
    repeatedly tries the overlap moves suggested by the binding faces —
    increments for I1 in increasing user order, then decrements for I2 —
    jumping to the first strictly better neighbour.  On termination every
    neighbour's optimum is within certificate tolerance of the returned value.
    """
    sol = solve_qp(instance, profile, start=start)
    if sol is None:
        raise ValueError("starting interleaving admits no schedule")
    qps = 1
    moves = 0
    values = [sol.value]
    while True:
        I1, I2 = active_index_sets(instance, profile, sol.arrivals)
        candidates = [(i, +1) for i in I1] + [(i, -1) for i in I2]
        improved = False
        certificate: list[float] = []
        for i, delta in candidates:
            k_new = list(profile.k)
            k_new[i - 1] += delta
            if not _valid_k(k_new):
                continue
            cand_profile = OrderProfile(k=tuple(k_new), h=tuple(h_from_k(k_new)))
            cand = solve_qp(instance, cand_profile, start=sol.arrivals)
            qps += 1
            if cand is None:
                continue
            certificate.append(cand.value)
            if cand.value < sol.value - IMPROVE_TOL:
                profile, sol = cand_profile, cand
                values.append(cand.value)
                moves += 1
                improved = True
                break
        if not improved:
            return NeighbourResult(
                arrivals=sol.arrivals,
                value=sol.value,
                profile=profile,
                values=tuple(values),
                qps_solved=qps,
                moves=moves,
                certificate=tuple(certificate),
            )
