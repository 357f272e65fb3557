"""Global minimization by sweeping every realizable interleaving.

The number of interleavings is the Catalan number of n, so this is only for
modest n (guarded above 15) — but each interleaving is a convex QP, so the
sweep gives certified global optima to compare the heuristics against.
Interleavings are processed in increasing order of an unconstrained lower
bound; once the bound passes the incumbent the rest can be discarded unsolved.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import Instance, OrderProfile, bounds, h_from_k
from .qp import quadratic_form, solve_qp, unconstrained_value

#: above this n the sweep warns (the CLI refuses without --force)
GUARD_LIMIT = 15


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def _k_vectors(n: int):
    """All nondecreasing k with k_i >= i and k_n = n, lexicographically."""
    k = list(range(1, n + 1))
    while True:
        yield tuple(k)
        i = n - 2
        while i >= 0 and k[i] >= n:
            i -= 1
        if i < 0:
            return
        k[i] += 1
        for j in range(i + 1, n - 1):
            k[j] = max(k[j - 1], j + 1)


def enumerate_profiles(n: int):
    """Generate every valid interleaving of n users, lexicographic in k."""
    for k in _k_vectors(n):
        yield OrderProfile(k=k, h=tuple(h_from_k(k)))


@dataclass(frozen=True)
class ExhaustiveResult:
    arrivals: np.ndarray
    value: float
    profile: OrderProfile
    profiles_total: int
    qps_solved: int
    pruned: int


def _bound_slack(instance: Instance) -> float:
    # the ridge in the bound solve can lift the bound by ridge * |a|^2
    a_lo, a_hi = bounds(instance)
    return 1e-9 * instance.n * max(a_lo * a_lo, a_hi * a_hi) + 1e-9


def _scan_bounds(instance: Instance, ks: list[tuple[int, ...]]):
    slack = _bound_slack(instance)
    out = []
    for k in ks:
        profile = OrderProfile(k=k, h=tuple(h_from_k(k)))
        Q, b, c0 = quadratic_form(instance, profile)
        out.append((unconstrained_value(Q, b, c0) - slack, k))
    return out


def _sweep(instance: Instance, ks: list[tuple[int, ...]]):
    """Two-pass sweep of the given interleavings: bound, sort, solve, cut."""
    ranked = sorted(_scan_bounds(instance, ks))
    best_val = np.inf
    best = None
    qps = 0
    for idx, (lb, k) in enumerate(ranked):
        if lb >= best_val:
            break
        profile = OrderProfile(k=k, h=tuple(h_from_k(k)))
        sol = solve_qp(instance, profile)
        qps += 1
        if sol is None:
            continue
        if sol.value < best_val:
            best_val = sol.value
            best = (sol.arrivals, profile)
    if best is None:
        raise RuntimeError("no interleaving admitted a feasible schedule")
    return best[0], best_val, best[1], qps, len(ks) - qps


def _sweep_chunk(args):
    instance, ks = args
    return _sweep(instance, ks)


def exhaustive_search(
    instance: Instance,
    threads: int = 1,
    force: bool = False,
    guard_limit: int = GUARD_LIMIT,
) -> ExhaustiveResult:
    """Certified global minimum over all interleavings of ``instance``.

    ``threads > 1`` splits the interleavings into chunks swept by worker
    processes; ties across chunks keep the lexicographically earliest
    interleaving, matching the serial sweep.
    """
    n = instance.n
    total = catalan(n)
    if n > guard_limit and not force:
        warnings.warn(
            f"{total} interleavings at n={n}; expect a very long sweep",
            stacklevel=2,
        )
    ks = list(_k_vectors(n))
    if threads > 1 and total > 64:
        chunk  = max(64, total // (threads * 8))
        parts = [ks[i : i + chunk] for i in range(0, len(ks), chunk)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_chunk, [(instance, p) for p in parts]))
        arrivals, value, profile, qps, pruned = results[0]
        for r in results[1:]:
            qps += r[3]
            pruned += r[4]
            if r[1] < value:
                arrivals, value, profile = r[0], r[1], r[2]
    else:
        arrivals, value, profile, qps, pruned = _sweep(instance, ks)
    return ExhaustiveResult(
        arrivals=np.asarray(arrivals),
        value=float(value),
        profile=profile,
        profiles_total=total,
        qps_solved=qps,
        pruned=pruned,
    )
