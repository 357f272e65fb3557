"""Exact system dynamics: arrivals -> departures and back.

With every user carrying one unit of demand and the per-user rate dropping by
``alpha`` for each extra present user, departure times solve a triangular
system of balance equations once the interleaving of arrivals and departures
is known.  The forward and inverse passes below discover the interleaving and
the times together, in at most ``2n`` candidate evaluations; an event-driven
simulation acts as an independent oracle for both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    TIME_TOL,
    Instance,
    InvariantError,
    OrderProfile,
    h_from_k,
)


@dataclass(frozen=True)
class DynamicsResult:
    """Arrivals, induced departures, their interleaving, and the work done."""

    arrivals: tuple[float, ...]
    departures: tuple[float, ...]
    profile: OrderProfile
    evaluations: int


def _check_sorted(vec: np.ndarray, name: str) -> None:
    if np.any(np.diff(vec) < 0.0):
        raise InvariantError(f"{name} not sorted")


def _forward_core(alpha: float, beta: float, a) -> tuple[list, list, list, int]:
    """Raw forward pass on a sorted arrival sequence; no validation.

    Returns (departures, k, h, evaluations) as plain lists.  Internal fast
    path for callers that simulate many small prefixes.
    """
    n = len(a)
    d = [0.0] * n
    k = [0] * n
    h = [0] * n
    evals = 0
    h_cur = 1
    k_prev = 1
    sum_d_window = 0.0  # sum of d_j over the current overlap window [h_cur, i-1]

    for i in range(1, n + 1):
        k_cur = max(i, k_prev)
        sum_a = 0.0
        for j in range(i, k_cur):  # arrivals strictly after i, up to k_cur
            sum_a += a[j]
        while True:
            denom = beta - alpha * (k_cur - i)
            cand = (
                1.0
                + (beta - alpha * (i - h_cur)) * a[i - 1]
                + alpha * (sum_d_window - sum_a)
            ) / denom
            evals += 1
            # Ties count the arrival as overlapping (non-strict a_k <= d_i).
            if k_cur < n and a[k_cur] <= cand + TIME_TOL:
                sum_a += a[k_cur]
                k_cur += 1
                continue
            break
        if a[k_cur - 1] > cand + 1e-6:
            raise RuntimeError(
                f"dynamics inconsistency at user {i}: departure {cand} "
                f"precedes arrival {k_cur} at {a[k_cur - 1]}"
            )
        d[i - 1] = cand
        k[i - 1] = k_cur
        h[i - 1] = h_cur
        k_prev = k_cur
        # Advance the window start to the first position still present at the
        # next arrival (smallest h with k_h >= i+1), dropping departed users.
        while h_cur <= i and k[h_cur - 1] < i + 1:
            sum_d_window -= d[h_cur - 1]
            h_cur += 1
        sum_d_window += d[i - 1]
    return d, k, h, evals


def forward_dynamics(instance: Instance, a) -> DynamicsResult:
    """Departure times induced by sorted arrival times ``a``.

    Walks users in arrival order.  For user ``i`` it assumes the arrivals up
    to position ``k`` overlap its stay, evaluates the balance equation under
    that assumption, and grows ``k`` while the candidate departure reaches the
    next arrival; including one more arrival only pushes the candidate later,
    so no backtracking is ever needed.
    """
    a = np.asarray(a, dtype=float)
    n = instance.n
    if a.size != n:
        raise InvariantError("arrival vector must have n entries")
    _check_sorted(a, "arrivals")
    d, k, h, evals = _forward_core(instance.alpha, instance.beta, a.tolist())
    profile = OrderProfile(k=tuple(k), h=tuple(h))
    return DynamicsResult(
        arrivals=tuple(float(v) for v in a),
        departures=tuple(d),
        profile=profile,
        evaluations=evals,
    )


def inverse_dynamics(instance: Instance, d) -> DynamicsResult:
    """Arrival times that induce the sorted departure times ``d``.

    Mirror image of :func:`forward_dynamics`: walks users in reverse order,
    shrinking the window start ``h`` while the candidate arrival falls at or
    before departure ``h-1``.
    """
    d = np.asarray(d, dtype=float)
    n = instance.n
    if d.size != n:
        raise InvariantError("departure vector must have n entries")
    _check_sorted(d, "departures")
    alpha, beta = instance.alpha, instance.beta

    prefix_d = np.concatenate(([0.0], np.cumsum(d)))
    a = [0.0] * n
    k = [0] * n
    h = [0] * n
    evals = 0
    k[n - 1] = n
    h_next = n  # stands in for h_{n+1}

    for i in range(n, 0, -1):
        k_i = k[i - 1]
        h_cur = min(i, h_next)
        sum_a_tail = sum(a[j - 1] for j in range(i + 1, k_i + 1))
        sum_d_mid = prefix_d[i - 1] - prefix_d[h_cur - 1]  # d_j for j in [h_cur, i-1]
        while True:
            denom = beta - alpha * (i - h_cur)
            cand = (
                (beta - alpha * (k_i - i)) * d[i - 1]
                - alpha * (sum_d_mid - sum_a_tail)
                - 1.0
            ) / denom
            evals += 1
            # Ties put the arrival at or before that departure, so the window
            # must open further (non-strict d_h >= a_i).
            if h_cur > 1 and d[h_cur - 2] >= cand - TIME_TOL:
                sum_d_mid += d[h_cur - 2]
                h_cur -= 1
                continue
            break
        if cand > d[h_cur - 1] + 1e-6:
            raise RuntimeError(
                f"dynamics inconsistency at user {i}: arrival {cand} "
                f"follows departure {h_cur} at {d[h_cur - 1]}"
            )
        a[i - 1] = cand
        h[i - 1] = h_cur
        h_next = h_cur
        if i > 1:
            # k_{i-1} = max{k : h_k <= i-1}, scanning down from k_i.
            kk = k_i
            while kk >= i and h[kk - 1] > i - 1:
                kk -= 1
            k[i - 2] = max(kk, i - 1)

    profile = OrderProfile(k=tuple(k), h=tuple(h))
    return DynamicsResult(
        arrivals=tuple(a),
        departures=tuple(float(v) for v in d),
        profile=profile,
        evaluations=evals,
    )


def build_matrices(instance: Instance, profile: OrderProfile) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient matrices (A, D) of the balance equations ``D d - A a = 1``.

    Row ``i`` reads: (beta - alpha*(k_i - i)) d_i - alpha * sum(d_j, h_i <= j < i)
    - (beta - alpha*(i - h_i)) a_i + alpha * sum(a_j, i < j <= k_i) = 1.
    """
    n = instance.n
    alpha, beta = instance.alpha, instance.beta
    if profile.n != n:
        raise InvariantError("profile size does not match instance")
    A = np.zeros((n, n))
    D = np.zeros((n, n))
    for i in range(1, n + 1):
        k_i, h_i = profile.k[i - 1], profile.h[i - 1]
        A[i - 1, i - 1] = beta - alpha * (i - h_i)
        A[i - 1, i : k_i] = -alpha
        D[i - 1, i - 1] = beta - alpha * (k_i - i)
        D[i - 1, h_i - 1 : i - 1] = -alpha
    return A, D


def simulate_oracle(instance: Instance, a) -> np.ndarray:
    """Event-driven reference simulation, independent of the recursions.

    Tracks remaining work per user between events (arrivals and work
    exhaustions); with ``q`` users present everyone is served at rate
    ``beta - alpha*(q-1)``, so the earliest pending exhaustion is
    ``min(remaining)/rate`` away.
    """
    a = np.asarray(a, dtype=float)
    n = instance.n
    if a.size != n:
        raise InvariantError("arrival vector must have n entries")
    _check_sorted(a, "arrivals")

    remaining = np.empty(n)
    d = np.zeros(n)
    active: list[int] = []  # indices in arrival order; earliest has least work
    i_next = 0
    t = a[0]

    while i_next < n or active:
        if not active:
            t = a[i_next]
        rate = instance.rate(len(active))
        t_dep = t + remaining[active[0]] / rate if active else np.inf
        t_arr = a[i_next] if i_next < n else np.inf
        if t_arr <= t_dep:
            # Admit the next user (arrivals win ties; a zero-length interval
            # at the old rate changes nothing).
            if active:
                remaining[active] -= rate * (t_arr - t)
            remaining[i_next] = 1.0
            active.append(i_next)
            i_next += 1
            t = t_arr
        else:
            remaining[active] -= rate * (t_dep - t)
            t = t_dep
            while active and remaining[active[0]] <= 1e-12:
                d[active[0]] = t
                active.pop(0)
    return d


def evaluate_cost(instance: Instance, arrivals) -> float:
    """Total cost of an arbitrary (possibly unordered) arrival vector.

    Each user keeps their own ideal departure: user ``u``'s departure is the
    one at their arrival rank (with identical demands, departures follow the
    arrival order).  Rank ties resolve by user index, matching a stable sort.
    """
    arr = np.asarray(arrivals, dtype=float)
    ranks = np.argsort(arr, kind="stable")
    d_sorted = np.asarray(
        forward_dynamics(instance, arr[ranks]).departures
    )
    d_by_user = np.empty_like(d_sorted)
    d_by_user[ranks] = d_sorted
    dev = d_by_user - instance.d_star_array
    return float(dev @ dev + instance.gamma * np.sum(d_by_user - arr))
