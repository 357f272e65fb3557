"""Command-line front end: instance I/O, solver dispatch, benchmark output.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success, 2
malformed input file, 3 model invariant violation, 4 exhaustive sweep
refused above the guard size without --force.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from .bench import (
    ExperimentSpec,
    generate_instance,
    run_experiment,
    write_diagram_csv,
    write_schedule_csv,
    write_summary_csv,
)
from .dynamics import evaluate_cost, forward_dynamics, inverse_dynamics
from .exhaustive import GUARD_LIMIT, exhaustive_search
from .heuristic import (
    combined_search,
    initial_points,
    solve_gamma_inf,
    solve_gamma_zero,
)
from .linesearch import cpi
from .model import Instance, InvariantError
from .neighbour import neighbour_search

EXIT_MALFORMED = 2
EXIT_INVARIANT = 3
EXIT_GUARD = 4

METHODS = ("combined", "cpi", "neighbour", "exhaustive", "gamma0", "gammainf")


class MalformedInput(ValueError):
    """Input file or vector does not match the documented schema."""


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise MalformedInput(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise MalformedInput(f"{path}: invalid JSON at line {e.lineno}") from e


def _number(doc, key, path):
    if key not in doc:
        raise MalformedInput(f"{path}: missing field '{key}'")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedInput(f"{path}: field '{key}' must be a number")
    return float(v)


def load_instance(path) -> Instance:
    """Read an instance document: flat schema or a generator block."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise MalformedInput(f"{path}: top level must be an object")
    if "family" in doc:
        if doc["family"] != "normal-quantile":
            raise MalformedInput(f"{path}: unknown family '{doc['family']}'")
        n = doc.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise MalformedInput(f"{path}: field 'n' must be a positive integer")
        spec = ExperimentSpec(
            n_values=(n,),
            gamma_values=(_number(doc, "gamma", path),),
            beta=_number(doc, "beta", path) if "beta" in doc else 1.0,
            alpha_over_n=(
                _number(doc, "alpha_over_n", path) if "alpha_over_n" in doc else 0.8
            ),
            sigma=_number(doc, "sigma", path) if "sigma" in doc else 0.5,
            sigma_scales_with_n=bool(doc.get("sigma_scales_with_n", False)),
        )
        return generate_instance(spec, n, spec.gamma_values[0])
    for key in ("n", "alpha", "beta", "gamma", "d_star"):
        if key not in doc:
            raise MalformedInput(f"{path}: missing field '{key}'")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MalformedInput(f"{path}: field 'n' must be a positive integer")
    d_star = doc["d_star"]
    if not isinstance(d_star, list) or len(d_star) != n:
        raise MalformedInput(f"{path}: field 'd_star' must be a list of n numbers")
    for v in d_star:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise MalformedInput(f"{path}: field 'd_star' must be a list of n numbers")
    return Instance(
        n=n,
        alpha=_number(doc, "alpha", path),
        beta=_number(doc, "beta", path),
        gamma=_number(doc, "gamma", path),
        d_star=tuple(float(v) for v in d_star),
    )


def _parse_vector(text, n) -> np.ndarray:
    try:
        vec = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError as e:
        raise MalformedInput(f"bad vector entry: {e}") from e
    if vec.size != n:
        raise MalformedInput(f"expected {n} comma-separated values, got {vec.size}")
    return vec


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def cmd_dynamics(args) -> int:
    inst = load_instance(args.instance)
    if args.arrivals is not None:
        vec = _parse_vector(args.arrivals, inst.n)
        if np.any(np.diff(vec) < 0):
            raise InvariantError("arrivals not sorted")
        res = forward_dynamics(inst, vec)
    else:
        vec = _parse_vector(args.departures, inst.n)
        if np.any(np.diff(vec) < 0):
            raise InvariantError("departures not sorted")
        res = inverse_dynamics(inst, vec)
    rows = [
        (i + 1, res.arrivals[i], res.departures[i],
         res.profile.k[i], res.profile.h[i])
        for i in range(inst.n)
    ]
    print("user arrival departure k h")
    for u, a, d, k, h in rows:
        print(f"{u} {_fmt(a)} {_fmt(d)} {k} {h}")
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["user", "arrival", "departure", "k", "h"])
            for u, a, d, k, h in rows:
                w.writerow([str(u), _fmt(a), _fmt(d), str(k), str(h)])
    return 0


def _dispatch_solve(inst, args):
    """Run the chosen method; returns (arrivals, diagnostics lines)."""
    notes = []
    if args.method == "combined":
        res = combined_search(inst, M=args.M, epsilon=args.epsilon)
        win = res.reports[res.start_index]
        notes.append(
            f"combined: start {res.start_index}, {win.cpi_cycles} cycles, "
            f"{sum(win.breakpoints.values())} breakpoints, {win.qps_solved} QPs"
        )
        return res.arrivals, notes
    if args.method == "cpi":
        best = None
        for idx, start in enumerate(initial_points(inst, args.M)):
            sweep = cpi(inst, start, epsilon=args.epsilon)
            if best is None or sweep.value < best[1].value:
                best = (idx, sweep)
        idx, sweep = best
        notes.append(f"cpi: start {idx}, {sweep.cycles} cycles, {sweep.segments} segments")
        return sweep.arrivals, notes
    if args.method == "neighbour":
        a0 = solve_gamma_zero(inst)
        profile = forward_dynamics(inst, a0).profile
        res = neighbour_search(inst, profile, start=a0)
        notes.append(f"neighbour: {res.moves} moves, {res.qps_solved} QPs")
        return res.arrivals, notes
    if args.method == "exhaustive":
        if inst.n > GUARD_LIMIT and not args.force:
            raise SystemExit(EXIT_GUARD)
        res = exhaustive_search(inst, threads=args.threads, force=args.force)
        notes.append(
            f"exhaustive: {res.profiles_total} interleavings, "
            f"{res.qps_solved} QPs solved, {res.pruned} pruned"
        )
        return res.arrivals, notes
    if args.method == "gamma0":
        return solve_gamma_zero(inst), ["gamma0: inverse dynamics of the ideal departures"]
    return solve_gamma_inf(inst), ["gammainf: spaced free-flow schedule"]


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    tic = time.perf_counter()
    try:
        arrivals, notes = _dispatch_solve(inst, args)
    except SystemExit as e:
        if e.code == EXIT_GUARD:
            print(
                f"exhaustive refused at n={inst.n} > {GUARD_LIMIT}; "
                "pass --force to run anyway",
                file=sys.stderr,
            )
            return EXIT_GUARD
        raise
    wall = time.perf_counter() - tic
    arrivals = np.asarray(arrivals, dtype=float)
    value = evaluate_cost(inst, arrivals)
    dyn = forward_dynamics(inst, np.sort(arrivals))
    print(_fmt(value))
    for line in notes:
        print(line, file=sys.stderr)
    print(f"wall time {wall:.3f}s", file=sys.stderr)
    if args.out:
        write_schedule_csv(args.out, dyn.arrivals, dyn.departures, inst.d_star)
        print(f"schedule written to {args.out}", file=sys.stderr)
    return 0


def load_experiment_spec(path) -> ExperimentSpec:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise MalformedInput(f"{path}: top level must be an object")
    for key in ("n", "gamma"):
        if key not in doc or not isinstance(doc[key], list):
            raise MalformedInput(f"{path}: missing list field '{key}'")
    for v in doc["n"]:
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise MalformedInput(f"{path}: field 'n' must list positive integers")
    for v in doc["gamma"]:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise MalformedInput(f"{path}: field 'gamma' must list numbers")
    kwargs = dict(
        n_values=tuple(doc["n"]),
        gamma_values=tuple(float(v) for v in doc["gamma"]),
    )
    for key in ("beta", "alpha_over_n", "sigma", "epsilon"):
        if key in doc:
            kwargs[key] = _number(doc, key, path)
    if "M" in doc:
        if not isinstance(doc["M"], int) or isinstance(doc["M"], bool):
            raise MalformedInput(f"{path}: field 'M' must be an integer")
        kwargs["M"] = doc["M"]
    for key in ("sigma_scales_with_n", "include_exhaustive"):
        if key in doc:
            kwargs[key] = bool(doc[key])
    if "quantile_positions" in doc:
        kwargs["quantile_positions"] = doc["quantile_positions"]
    try:
        return ExperimentSpec(**kwargs)
    except ValueError as e:
        raise MalformedInput(f"{path}: {e}") from e


def _cell_tag(n, gamma) -> str:
    return f"n{n}_gamma{gamma:g}"


def cmd_bench(args) -> int:
    spec = load_experiment_spec(args.spec)
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    results = run_experiment(spec, threads=args.threads)
    summary = os.path.join(outdir, "summary.csv")
    write_summary_csv(summary, results)
    print(summary)
    for r in results:
        tag = _cell_tag(r.n, r.gamma)
        sched = os.path.join(outdir, f"schedule_{tag}.csv")
        write_schedule_csv(sched, r.arrivals, r.departures, r.ideal)
        print(sched)
        diagram = os.path.join(outdir, f"diagram_{tag}.csv")
        write_diagram_csv(diagram, r)
        print(diagram)
    print(f"{len(results)} cells", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sharesched",
        description="Schedule arrivals into a shared processor with "
        "congestion-dependent slowdown.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dynamics", help="map arrivals to departures or back")
    d.add_argument("instance", help="instance JSON document")
    grp = d.add_mutually_exclusive_group(required=True)
    grp.add_argument("--arrivals", help="comma-separated sorted arrival times")
    grp.add_argument("--departures", help="comma-separated sorted departure times")
    d.add_argument("--out", help="also write the table as CSV")
    d.set_defaults(func=cmd_dynamics)

    s = sub.add_parser("solve", help="minimize the scheduling cost")
    s.add_argument("instance", help="instance JSON document")
    s.add_argument("--method", choices=METHODS, default="combined")
    s.add_argument("--M", type=int, default=3, help="number of starting points")
    s.add_argument("--epsilon", type=float, default=1e-3,
                   help="per-cycle improvement cutoff")
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    s.add_argument("--force", action="store_true",
                   help="run the exhaustive sweep past the size guard")
    s.add_argument("--out", help="write the schedule CSV here")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run an (n, gamma) experiment grid")
    b.add_argument("spec", help="experiment spec JSON document")
    b.add_argument("--out", help="output directory (default: current)")
    b.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MalformedInput as e:
        print(str(e), file=sys.stderr)
        return EXIT_MALFORMED
    except InvariantError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
