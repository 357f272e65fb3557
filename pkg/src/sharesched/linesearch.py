"""Exact line search along one arrival coordinate, and cyclic descent on it.

Moving a single user's arrival from the left end of the search box to the
right end while the others stay put, the departure vector is piecewise affine
in the moving coordinate: it changes slope only when the mover passes a fixed
arrival, when a departure catches the mover, or when a departure crosses a
fixed arrival.  The sweep walks those breakpoints in order, minimizing the
convex quadratic restriction on each segment, so one pass finds the exact
coordinate minimum.  Cycling the sweep over all coordinates gives the descent
method used by the combined heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import evaluate_cost, forward_dynamics
from .model import TIME_TOL, Instance, bounds

#: hard cap on sweep breakpoints, far above the cubic worst case
_SEGMENT_CAP_FACTOR = 10

#: departure slopes smaller than this are treated as flat (no crossing event)
_SLOPE_TOL = 1e-12

#: sweep positions are cross-checked against the dynamics this often
_DRIFT_STRIDE = 50

_DRIFT_TOL = 1e-6

BREAKPOINT_KINDS = ("1a", "1b", "2a", "2b", "terminal")


@dataclass(frozen=True)
class LineSearchResult:
    """Best arrival vector found for one coordinate, with sweep statistics."""

    arrivals: np.ndarray
    value: float
    segments: int
    breakpoints: dict[str, int]
    moved: bool


def _coefficients(alpha, beta, slot_a, k, h, pi, x):
    """Per-slot departure slope and intercept in the moving coordinate.

    Arrays are 1-based (index 0 unused).  On the current segment slot i
    departs at theta[i] * x + eta[i]; slots before the mover have
    nonpositive slope (the mover's own slope carries no sign guarantee).
    """
    n = len(slot_a) - 1
    theta = [0.0] * (n + 1)
    eta = [0.0] * (n + 1)
    prefix = [0.0] * (n + 1)
    for j in range(1, n + 1):
        prefix[j] = prefix[j - 1] + slot_a[j]
    w = 1
    sum_t = 0.0
    sum_e = 0.0
    for i in range(1, n + 1):
        while w < h[i]:
            sum_t -= theta[w]
            sum_e -= eta[w]
            w += 1
        denom = beta - alpha * (k[i] - i)
        s_arr = prefix[k[i]] - prefix[i]
        if i < pi <= k[i]:
            s_arr -= x  # the mover's own column belongs to the slope
        if i < pi:
            th = 0.0 if k[i] < pi else -alpha * (1.0 - sum_t) / denom
            et = (
                1.0
                + (beta - alpha * (i - h[i])) * slot_a[i]
                + alpha * (sum_e - s_arr)
            ) / denom
        elif i == pi:
            th = (beta - alpha * (i - h[i]) + alpha * sum_t) / denom
            et = (1.0 - alpha * (s_arr - sum_e)) / denom
        else:
            th = alpha * sum_t / denom
            et = (
                1.0
                + (beta - alpha * (i - h[i])) * slot_a[i]
                + alpha * (sum_e - s_arr)
            ) / denom
        theta[i] = th
        eta[i] = et
        sum_t += th
        sum_e += et
    return theta, eta


def _events(slot_a, k, theta, eta, pi, x, a_hi):
    """Distances to the next slope change, as (order, kind, distance) rows."""
    n = len(slot_a) - 1
    out = []
    if pi < n:
        out.append((0, "1a", max(slot_a[pi + 1] - x, 0.0)))
    for i in range(1, n + 1):
        th = theta[i]
        d_now = th * x + eta[i]
        if th < -_SLOPE_TOL:
            if k[i] == pi:
                if i == pi:
                    # the mover's sojourn stays >= 1/beta, so its own
                    # departure can never reach its own arrival: another
                    # slope change always intervenes first
                    continue
                # falling departure meets the moving arrival
                t = (x - d_now) / (th - 1.0)
                kind = "1b"
            else:
                t = (slot_a[k[i]] - d_now) / th
                kind = "2b"
        elif th > _SLOPE_TOL and k[i] < n:
            t = (slot_a[k[i] + 1] - d_now) / th
            kind = "2a"
        else:
            continue
        out.append((i, kind, max(t, 0.0)))
    out.append((n + 1, "terminal", max(a_hi - x, 0.0)))
    return out


def _segment_argmin(theta, eta, dstar_slot, gamma, x, tau):
    """Candidate minimizer inside [x, x+tau], or None when the segment rises.

    The restricted cost is a convex parabola; only a segment that starts
    downhill can improve on its own left edge, and then the minimum is the
    stationary point or the right edge, whichever comes first.
    """
    n = len(theta) - 1
    curv = 0.0
    lin = 0.0
    s_t = 0.0
    for i in range(1, n + 1):
        curv += theta[i] * theta[i]
        lin += theta[i] * (eta[i] - dstar_slot[i])
        s_t += theta[i]
    slope0 = 2.0 * x * curv + 2.0 * lin + gamma * (s_t - 1.0)
    if slope0 >= 0.0:
        return None
    if curv > 1e-15:
        y0 = -(2.0 * lin + gamma * (s_t - 1.0)) / (2.0 * curv)
        return min(y0, x + tau)
    return x + tau


def line_search(instance: Instance, arrivals, r: int) -> LineSearchResult:
    """Exact minimization of the cost over coordinate ``r`` (0-based).

    The other arrivals stay fixed; the incumbent starts as the better of the
    incoming vector and the left box edge, so the result never regresses.
    Returns the coordinate-wise optimal arrival vector in user order.
    """
    n = instance.n
    alpha, beta, gamma = instance.alpha, instance.beta, instance.gamma
    a_in = np.asarray(arrivals, dtype=float)
    if a_in.size != n:
        raise ValueError("arrival vector must have n entries")
    if not 0 <= r < n:
        raise ValueError("coordinate index out of range")
    a_lo, a_hi = bounds(instance)
    d_star = instance.d_star_array

    best_vec = a_in.copy()
    best_val = evaluate_cost(instance, a_in)
    counts = dict.fromkeys(BREAKPOINT_KINDS, 0)

    if n == 1:
        # single coordinate: the parabola minimum in closed form, clipped
        y = min(max(d_star[0] - 1.0 / beta, a_lo), a_hi)
        val = evaluate_cost(instance, np.array([y]))
        if val < best_val:
            best_val, best_vec = val, np.array([y])
        counts["terminal"] += 1
        return LineSearchResult(
            arrivals=best_vec,
            value=best_val,
            segments=1,
            breakpoints=counts,
            moved=bool(best_vec[0] != a_in[0]),
        )

    others = sorted((a_in[u], u) for u in range(n) if u != r)

    def assemble(y: float) -> np.ndarray:
        out = np.empty(n)
        for v, u in others:
            out[u] = v
        out[r] = y
        return out

    x = a_lo
    pi = 1 + sum(1 for v, _ in others if v < a_lo)  # mover leads any ties
    slot_a = [0.0] * (n + 1)
    dstar_slot = [0.0] * (n + 1)
    user_slot = [-1] * (n + 1)
    s = 1
    for v, u in others:
        if s == pi:
            s += 1
        slot_a[s] = v
        dstar_slot[s] = d_star[u]
        user_slot[s] = u
        s += 1
    slot_a[pi] = x
    dstar_slot[pi] = d_star[r]
    user_slot[pi] = r

    start_vec = assemble(x)
    start_val = evaluate_cost(instance, start_vec)
    if start_val < best_val:
        best_val, best_vec = start_val, start_vec

    prof = forward_dynamics(instance, np.array(slot_a[1:])).profile
    k = [0] + list(prof.k)
    h = [0] + list(prof.h)

    segments = 0
    cap = _SEGMENT_CAP_FACTOR * n**3 + 100
    while True:
        segments += 1
        if segments > cap:
            raise RuntimeError("coordinate sweep failed to terminate")
        theta, eta = _coefficients(alpha, beta, slot_a, k, h, pi, x)
        if segments % _DRIFT_STRIDE == 0:
            d_pred = np.array([theta[i] * x + eta[i] for i in range(1, n + 1)])
            d_true = np.array(
                forward_dynamics(instance, np.array(slot_a[1:])).departures
            )
            if np.max(np.abs(d_pred - d_true)) > _DRIFT_TOL:
                raise RuntimeError("sweep state drifted from the exact dynamics")
        events = _events(slot_a, k, theta, eta, pi, x, a_hi)
        tau = min(t for _, _, t in events)
        tie = 1e-12 * (1.0 + abs(x) + tau)
        members = sorted(e for e in events if e[2] <= tau + tie)
        if tau > TIME_TOL:
            y_c = _segment_argmin(theta, eta, dstar_slot, gamma, x, tau)
            if y_c is not None:
                vec = assemble(y_c)
                val = evaluate_cost(instance, vec)
                if val < best_val:
                    best_val, best_vec = val, vec
        for _, kind, _ in members:
            counts[kind] += 1
        if any(kind == "terminal" for _, kind, _ in members):
            break
        new_x = x + tau
        for key, kind, _ in members:
            if kind == "1a":
                passed = slot_a[pi + 1]
                slot_a[pi] = passed
                dstar_slot[pi], dstar_slot[pi + 1] = dstar_slot[pi + 1], dstar_slot[pi]
                user_slot[pi], user_slot[pi + 1] = user_slot[pi + 1], user_slot[pi]
                pi += 1
                if passed > new_x:
                    new_x = passed
            elif kind in ("1b", "2b"):
                i = key
                old_k = k[i]
                if k[i] - 1 < i or h[old_k] + 1 > old_k:
                    raise RuntimeError("sweep produced an invalid interleaving")
                h[old_k] += 1
                k[i] -= 1
            else:  # 2a
                i = key
                k[i] += 1
                if h[k[i]] - 1 < 1:
                    raise RuntimeError("sweep produced an invalid interleaving")
                h[k[i]] -= 1
        x = new_x
        slot_a[pi] = x

    return LineSearchResult(
        arrivals=best_vec,
        value=best_val,
        segments=segments,
        breakpoints=counts,
        moved=bool(not np.array_equal(best_vec, a_in)),
    )


@dataclass(frozen=True)
class CPIResult:
    """Outcome of cyclic per-coordinate descent."""

    arrivals: np.ndarray
    value: float
    cycles: int
    cycle_values: tuple[float, ...]
    breakpoints: dict[str, int]
    segments: int


def cpi(
    instance: Instance,
    a0,
    epsilon: float = 1e-3,
    max_cycles: int = 1000,
) -> CPIResult:
    """Cycle exact coordinate sweeps until a full cycle gains at most epsilon.

    After each cycle the arrival values are resorted into user order, which
    never hurts: pairing sorted arrivals with the sorted due dates is the
    cheapest assignment, and the sojourn total only depends on the values.
    Returns the sorted arrival vector of the final cycle.
    """
    n = instance.n
    a = np.asarray(a0, dtype=float).copy()
    if a.size != n:
        raise ValueError("arrival vector must have n entries")
    prev = evaluate_cost(instance, a)
    counts = dict.fromkeys(BREAKPOINT_KINDS, 0)
    segments = 0
    cycle_values: list[float] = []
    cycles = 0
    while cycles < max_cycles:
        cycles += 1
        for r in range(n):
            res = line_search(instance, a, r)
            a = res.arrivals
            segments += res.segments
            for kind, c in res.breakpoints.items():
                counts[kind] += c
        a = np.sort(a)
        cur = evaluate_cost(instance, a)
        cycle_values.append(cur)
        if prev - cur <= epsilon:
            break
        prev = cur
    else:
        raise RuntimeError("cyclic descent failed to converge")
    return CPIResult(
        arrivals=a,
        value=cur,
        cycles=cycles,
        cycle_values=tuple(cycle_values),
        breakpoints=counts,
        segments=segments,
    )
