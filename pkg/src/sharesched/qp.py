"""Per-interleaving quadratic programs.

Fixing the interleaving of arrivals and departures makes the departure vector
an affine function of the arrival vector, so the scheduling cost restricted to
one interleaving is a strictly convex quadratic over a polytope (the arrival
vectors realizing that interleaving).  This module builds the affine map, the
quadratic form, the constraint rows, and solves the resulting QP with a primal
active-set method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .dynamics import _forward_core
from .model import Instance, InvariantError, OrderProfile, bounds

#: slack below which a polytope face counts as active
ACTIVITY_TOL = 1e-7

_RIDGE = 1e-10


def affine_map(instance: Instance, profile: OrderProfile) -> tuple[np.ndarray, np.ndarray]:
    """(theta, eta) with departures = theta @ arrivals + eta on this interleaving.

    Solves the triangular balance system by forward substitution, keeping a
    running sum of the rows inside the overlap window [h_i, i-1].
    """
    n = instance.n
    if profile.n != n:
        raise InvariantError("profile size does not match instance")
    alpha, beta = instance.alpha, instance.beta
    k, h = profile.k, profile.h

    theta = np.zeros((n, n))
    eta = np.zeros(n)
    row_sum = np.zeros(n)
    eta_sum = 0.0
    win_lo = 1  # current window start; h is nondecreasing
    for i in range(1, n + 1):
        while win_lo < h[i - 1]:
            row_sum -= theta[win_lo - 1]
            eta_sum -= eta[win_lo - 1]
            win_lo += 1
        a_row = np.zeros(n)
        a_row[i - 1] = beta - alpha * (i - h[i - 1])
        a_row[i : k[i - 1]] = -alpha
        diag = beta - alpha * (k[i - 1] - i)
        theta[i - 1] = (a_row + alpha * row_sum) / diag
        eta[i - 1] = (1.0 + alpha * eta_sum) / diag
        row_sum += theta[i - 1]
        eta_sum += eta[i - 1]
    return theta, eta


def quadratic_form(
    instance: Instance, profile: OrderProfile, affine=None
) -> tuple[np.ndarray, np.ndarray, float]:
    """(Q, b, c0) with cost(a) = a Q a + b a + c0 on this interleaving."""
    theta, eta = affine if affine is not None else affine_map(instance, profile)
    gamma = instance.gamma
    shift = eta - instance.d_star_array
    Q = theta.T @ theta
    b = 2.0 * theta.T @ shift + gamma * (theta.sum(axis=0) - 1.0)
    c0 = float(shift @ shift + gamma * eta.sum())
    return Q, b, c0


def polytope_constraints(
    instance: Instance, profile: OrderProfile, affine=None
) -> tuple[np.ndarray, np.ndarray]:
    """Rows (G, g) with the interleaving's arrival polytope = {a : G a >= g}.

    Per user i the induced departure must fall at or after arrival k_i and at
    or before arrival k_i + 1 (absent when k_i = n); arrivals must be sorted
    and the first/last pinned inside the search box.
    """
    theta, eta = affine if affine is not None else affine_map(instance, profile)
    n = instance.n
    k = profile.k
    a_lo, a_hi = bounds(instance)
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    for i in range(1, n + 1):
        row = theta[i - 1].copy()
        row[k[i - 1] - 1] -= 1.0
        rows.append(row)
        rhs.append(-eta[i - 1])
        if k[i - 1] < n:
            row = -theta[i - 1]
            row[k[i - 1]] += 1.0
            rows.append(row)
            rhs.append(eta[i - 1])
    for i in range(n - 1):
        row = np.zeros(n)
        row[i] = -1.0
        row[i + 1] = 1.0
        rows.append(row)
        rhs.append(0.0)
    first = np.zeros(n)
    first[0] = 1.0
    rows.append(first)
    rhs.append(a_lo)
    last = np.zeros(n)
    last[n - 1] = -1.0
    rows.append(last)
    rhs.append(-a_hi)
    return np.array(rows), np.array(rhs)


def membership(instance: Instance, profile: OrderProfile, a, tol: float = ACTIVITY_TOL) -> bool:
    """Whether arrival vector ``a`` realizes this interleaving, within ``tol``."""
    G, g = polytope_constraints(instance, profile)
    a = np.asarray(a, dtype=float)
    return bool(np.all(G @ a - g >= -tol))


def feasible_point(
    instance: Instance, profile: OrderProfile, polytope=None
) -> np.ndarray | None:
    """Strictly interior arrival vector for the interleaving, greedily built.

    Places arrivals one at a time: the next arrival must come after every
    departure the interleaving says has happened and before every departure it
    says has not.  Provisional departures of still-present users only move
    later once more arrivals join, so the midpoint choice stays safe.  Falls
    back to ``None`` when the window closes (caller then tries an LP).
    """
    n = instance.n
    alpha, beta = instance.alpha, instance.beta
    k = profile.k
    a = [0.0]
    for nxt in range(2, n + 1):  # choosing arrival nxt
        d_hat, _, _, _ = _forward_core(alpha, beta, a)
        lo = a[-1]
        hi = np.inf
        for j in range(1, nxt):
            if k[j - 1] < nxt:
                lo = max(lo, d_hat[j - 1])
            else:
                hi = min(hi, d_hat[j - 1])
        if np.isinf(hi):
            a.append(lo + 1.0 / beta)
        else:
            if hi - lo <= 1e-12:
                return None
            a.append(lo + 0.5 * (hi - lo))
    arr = np.array(a)
    a_lo, a_hi = bounds(instance)
    spread = arr[-1] - arr[0]
    room = (a_hi - a_lo) - spread
    if room < 0:
        return None  # cannot happen for valid inputs; defensive
    arr += (a_lo + min(0.5 * room, 1.0 / beta)) - arr[0]
    G, g = polytope if polytope is not None else polytope_constraints(instance, profile)
    if not np.all(G @ arr - g >= 1e-9):
        return None
    return arr


def _lp_interior(G: np.ndarray, g: np.ndarray) -> np.ndarray | None:
    """Max-margin interior point of {a : G a >= g} via linear programming."""
    m, n = G.shape
    A_ub = np.hstack([-G, np.ones((m, 1))])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=-g,
        bounds=[(None, None)] * n + [(None, 1.0)],
        method="highs",
    )
    if not res.success or res.x[-1] <= 1e-10:
        return None
    return res.x[:n]


@dataclass(frozen=True)
class QPSolution:
    arrivals: np.ndarray
    value: float
    iterations: int
    multipliers: np.ndarray
    working_set: tuple[int, ...]


def solve_convex_qp(
    Q: np.ndarray,
    b: np.ndarray,
    G: np.ndarray,
    g: np.ndarray,
    x0: np.ndarray,
    max_iter: int | None = None,
) -> tuple[np.ndarray, int, np.ndarray, tuple[int, ...]]:
    """Minimize x Q x + b x subject to G x >= g from feasible ``x0``.

    Primal active-set iteration: solve the equality-constrained problem on the
    working set, take the longest feasible step toward its optimum, add the
    blocking row, and drop the row with the most negative multiplier once the
    subproblem optimum is reached.  A hair of ridge keeps the KKT systems
    well posed.

    Degenerate vertices (more tight rows than dimensions) get three guards:
    a step direction at solver noise level counts as stationary, a zero-length
    step blocked by a row already implied by the working set is discarded as
    noise rather than added, and after an unusually long run the add/drop
    choices switch to lowest-index (Bland) order, which cannot cycle.
    """
    n = Q.shape[0]
    m = G.shape[0]
    Qr = 2.0 * (Q + _RIDGE * (1.0 + np.trace(Q) / n) * np.eye(n))
    x = np.array(x0, dtype=float)
    work: list[int] = []
    lam_w = np.zeros(0)
    if max_iter is None:
        max_iter = 50 * (m + n + 1)
    bland_after = 5 * (m + n + 1)
    done = False
    for it in range(1, max_iter + 1):
        bland = it > bland_after
        Gw = G[work]
        size = n + len(work)
        K = np.zeros((size, size))
        K[:n, :n] = Qr
        K[:n, n:] = -Gw.T
        K[n:, :n] = Gw
        rhs = np.concatenate([-b, g[work]])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        x_star, lam_w = sol[:n], sol[n:]
        p = x_star - x
        stationary = np.max(np.abs(p), initial=0.0) <= 1e-9 * (
            1.0 + np.max(np.abs(x))
        )
        blocker = -1
        if not stationary:
            gp = G @ p
            slack = G @ x - g
            step = 1.0
            mask = gp < -1e-13
            if work:
                mask[work] = False
            if np.any(mask):
                ratios = np.full(m, np.inf)
                ratios[mask] = np.maximum(slack[mask], 0.0) / -gp[mask]
                rmin = float(ratios.min())
                if rmin < 1.0 - 1e-15:
                    # lowest index in the tie band; a wider band under Bland
                    tie = 1e-12 if bland else 1e-15
                    blocker = int(np.argmax(ratios <= rmin + tie))
                    step = min(float(ratios[blocker]), 1.0)
            if blocker >= 0 and step <= 1e-13 and work:
                # zero step into a row the working set already implies:
                # the direction was numerical noise off a degenerate vertex
                resid = G[blocker] - Gw.T @ np.linalg.lstsq(
                    Gw.T, G[blocker], rcond=None
                )[0]
                if np.max(np.abs(resid)) <= 1e-8:
                    stationary = True
                    blocker = -1
        if stationary:
            if lam_w.size == 0 or np.min(lam_w) >= -1e-9:
                done = True
                break
            if bland:
                low = min(i for i, v in enumerate(lam_w) if v < -1e-9)
                work.pop(low)
            else:
                work.pop(int(np.argmin(lam_w)))
            continue
        x = x + step * p
        if blocker >= 0:
            work.append(blocker)
            work.sort()
    if not done:
        raise RuntimeError("active-set iteration limit reached")
    lam = np.zeros(m)
    lam[work] = lam_w
    return x, it, lam, tuple(work)


def solve_qp(
    instance: Instance, profile: OrderProfile, start=None
) -> QPSolution | None:
    """Minimize the scheduling cost over one interleaving's arrival polytope.

    ``start`` may supply a known feasible arrival vector (warm start); the
    greedy constructor and an LP are tried otherwise.  Returns ``None`` when
    the polytope has no interior point.
    """
    aff = affine_map(instance, profile)
    Q, b, c0 = quadratic_form(instance, profile, affine=aff)
    G, g = polytope_constraints(instance, profile, affine=aff)
    x0 = None
    if start is not None:
        cand = np.asarray(start, dtype=float)
        if np.all(G @ cand - g >= -1e-9):
            x0 = cand
    if x0 is None:
        x0 = feasible_point(instance, profile, polytope=(G, g))
    if x0 is None:
        x0 = _lp_interior(G, g)
    if x0 is None:
        return None
    x, iters, lam, work = solve_convex_qp(Q, b, G, g, x0)
    value = float(x @ Q @ x + b @ x + c0)
    return QPSolution(
        arrivals=x, value=value, iterations=iters, multipliers=lam, working_set=work
    )


def unconstrained_value(Q: np.ndarray, b: np.ndarray, c0: float) -> float:
    """Value of the quadratic at its unconstrained minimum (a lower bound)."""
    n = Q.shape[0]
    Qr = Q + _RIDGE * (1.0 + np.trace(Q) / n) * np.eye(n)
    x = np.linalg.solve(2.0 * Qr, -b)
    return float(x @ Q @ x + b @ x + c0)
