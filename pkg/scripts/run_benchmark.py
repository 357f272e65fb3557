#!/usr/bin/env python3
"""Run the benchmark grid and write the summary / schedule / diagram CSVs.

Sweeps a grid of population sizes and sojourn-cost weights over the
standard-normal-quantile due-date family (sigma = 0.04 n, slowdown
alpha = 0.8 / n, beta = 1) and reports, per cell, the combined-search
value and diagnostics.  With --exhaustive every cell is also certified
against the full interleaving sweep ("global_opt" column in the summary);
that path is only sensible up to n around 12 on one core.

Typical uses:

    python3 scripts/run_benchmark.py --out results/
    python3 scripts/run_benchmark.py --sizes 3 5 10 --exhaustive --out results/
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from sharesched.bench import (
    ExperimentSpec,
    run_experiment,
    write_diagram_csv,
    write_schedule_csv,
    write_summary_csv,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[3, 5, 10, 15])
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.1, 1.0, 20.0])
    ap.add_argument("--M", type=int, default=3, help="starting points per cell")
    ap.add_argument("--epsilon", type=float, default=1e-3)
    ap.add_argument("--sigma", type=float, default=0.04)
    ap.add_argument(
        "--fixed-sigma",
        action="store_true",
        help="use --sigma as-is instead of scaling it by n",
    )
    ap.add_argument(
        "--exhaustive",
        action="store_true",
        help="also certify each cell against the full interleaving sweep",
    )
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results", help="output directory")
    args = ap.parse_args()

    spec = ExperimentSpec(
        n_values=tuple(args.sizes),
        gamma_values=tuple(args.gammas),
        sigma=args.sigma,
        sigma_scales_with_n=not args.fixed_sigma,
        M=args.M,
        epsilon=args.epsilon,
        include_exhaustive=args.exhaustive,
    )
    os.makedirs(args.out, exist_ok=True)

    t0 = time.perf_counter()
    results = run_experiment(spec, threads=args.threads)
    elapsed = time.perf_counter() - t0

    write_summary_csv(os.path.join(args.out, "summary.csv"), results)
    for r in results:
        tag = f"n{r.n}_gamma{r.gamma:g}"
        write_schedule_csv(
            os.path.join(args.out, f"schedule_{tag}.csv"),
            r.arrivals,
            r.departures,
            r.ideal,
        )
        write_diagram_csv(os.path.join(args.out, f"diagram_{tag}.csv"), r)

    header = f"{'n':>4} {'gamma':>6} {'value':>14} {'cycles':>6} {'qps':>5} {'time':>8}"
    if args.exhaustive:
        header += f" {'exhaustive':>14} {'global':>6}"
    print(header)
    for r in results:
        line = (
            f"{r.n:>4} {r.gamma:>6g} {r.value:>14.6f} "
            f"{r.cpi_cycles:>6} {r.ns_qps:>5} {r.wall_time:>7.2f}s"
        )
        if args.exhaustive:
            gap = abs(r.value - r.exhaustive_value) / max(abs(r.exhaustive_value), 1e-9)
            line += f" {r.exhaustive_value:>14.6f} {'yes' if gap <= 1e-6 else 'NO':>6}"
        print(line)
    print(f"\n{len(results)} cells in {elapsed:.1f}s -> {args.out}/summary.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
