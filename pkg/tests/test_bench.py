import csv

import numpy as np
import pytest
from scipy.stats import norm

from sharesched.bench import (
    CellResult,
    ExperimentSpec,
    generate_instance,
    normal_quantile,
    run_experiment,
    write_diagram_csv,
    write_schedule_csv,
    write_summary_csv,
)
from sharesched.dynamics import evaluate_cost
from sharesched.exhaustive import exhaustive_search


def test_quantile_against_reference():
    ps = np.concatenate([
        np.array([1e-12, 1e-9, 1e-6, 1e-4, 0.02424, 0.02426]),
        np.linspace(0.001, 0.999, 199),
        1.0 - np.array([1e-12, 1e-9, 1e-6, 1e-4]),
    ])
    for p in ps:
        assert normal_quantile(float(p)) == pytest.approx(
            norm.ppf(p), abs=1e-9
        )
    assert normal_quantile(0.7, mu=2.0, sigma=3.0) == pytest.approx(
        norm.ppf(0.7, loc=2.0, scale=3.0), abs=1e-9
    )


def test_quantile_rejects_boundary():
    for p in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            normal_quantile(p)


def test_generate_instance_pins():
    spec = ExperimentSpec(n_values=(1, 3, 15), gamma_values=(1.0,))
    one = generate_instance(spec, 1, 1.0)
    assert one.d_star[0] == pytest.approx(0.0, abs=1e-12)
    three = generate_instance(spec, 3, 1.0)
    assert np.asarray(three.d_star) == pytest.approx(
        [-0.33724489, 0.0, 0.33724489], abs=1e-6
    )
    assert three.alpha == pytest.approx(0.8 / 3)
    assert three.beta == 1.0
    fifteen = generate_instance(spec, 15, 1.0)
    d = np.asarray(fifteen.d_star)
    assert d[7] == pytest.approx(0.0, abs=1e-12)
    assert d == pytest.approx(-d[::-1], abs=1e-9)
    assert np.all(np.diff(d) > 0)


def test_generate_instance_scaled_sigma():
    spec = ExperimentSpec(
        n_values=(10,), gamma_values=(1.0,), sigma=0.04, sigma_scales_with_n=True
    )
    inst = generate_instance(spec, 10, 1.0)
    base = ExperimentSpec(n_values=(10,), gamma_values=(1.0,), sigma=0.4)
    ref = generate_instance(base, 10, 1.0)
    assert np.asarray(inst.d_star) == pytest.approx(
        np.asarray(ref.d_star), abs=1e-12
    )


def test_generate_instance_midpoint_convention():
    spec = ExperimentSpec(
        n_values=(4,), gamma_values=(1.0,), quantile_positions="midpoint"
    )
    inst = generate_instance(spec, 4, 1.0)
    want = [norm.ppf((i + 0.5) / 4, scale=0.5) for i in range(4)]
    assert np.asarray(inst.d_star) == pytest.approx(want, abs=1e-9)
    with pytest.raises(ValueError):
        ExperimentSpec(
            n_values=(4,), gamma_values=(1.0,), quantile_positions="thirds"
        )


def test_run_experiment_small_grid():
    spec = ExperimentSpec(
        n_values=(3,), gamma_values=(1.0,), include_exhaustive=True
    )
    rows = run_experiment(spec)
    assert len(rows) == 1
    r = rows[0]
    assert r.n == 3 and r.gamma == 1.0
    assert r.profiles_total == 5
    assert r.value == pytest.approx(r.exhaustive_value, abs=1e-8)
    inst = generate_instance(spec, 3, 1.0)
    assert evaluate_cost(inst, np.asarray(r.arrivals)) == pytest.approx(
        r.value, abs=1e-8
    )
    assert r.cpi_cycles >= 1
    assert r.wall_time >= 0.0
    assert np.all(np.diff(r.arrivals) >= 0)


def test_run_experiment_parallel_matches_serial():
    spec = ExperimentSpec(n_values=(2, 3), gamma_values=(0.5, 2.0))
    serial = run_experiment(spec, threads=1)
    parallel = run_experiment(spec, threads=2)
    assert len(serial) == len(parallel) == 4
    for a, b in zip(serial, parallel):
        assert (a.n, a.gamma) == (b.n, b.gamma)
        assert a.value == pytest.approx(b.value, abs=0.0)
        assert a.arrivals == pytest.approx(b.arrivals, abs=0.0)


def test_breakpoint_totals_within_budget():
    spec = ExperimentSpec(n_values=(5, 8), gamma_values=(1.0,))
    for r in run_experiment(spec):
        n = r.n
        per_sweep = n**3 / 3 - n**2 + 8 * n / 3 - 2
        # winning start: cycles * n sweeps, plus one terminal mark per sweep
        assert r.breakpoints_total <= r.cpi_cycles * n * (per_sweep + 1)


def test_csv_writers_round_trip(tmp_path):
    spec = ExperimentSpec(
        n_values=(3,), gamma_values=(1.0,), include_exhaustive=True
    )
    rows = run_experiment(spec)
    summary = tmp_path / "summary.csv"
    write_summary_csv(summary, rows)
    with open(summary, newline="") as f:
        got = list(csv.DictReader(f))
    assert len(got) == 1
    assert float(got[0]["value"]) == pytest.approx(rows[0].value, abs=1e-9)
    assert got[0]["global_opt"] == "yes"
    assert got[0]["n"] == "3"

    diagram = tmp_path / "diagram.csv"
    write_diagram_csv(diagram, rows[0])
    with open(diagram, newline="") as f:
        dg = list(csv.DictReader(f))
    assert [row["user"] for row in dg] == ["1", "2", "3"]
    for row, a, d, s in zip(dg, rows[0].arrivals, rows[0].departures, rows[0].ideal):
        assert float(row["arrival"]) == pytest.approx(a, abs=1e-9)
        assert float(row["departure"]) == pytest.approx(d, abs=1e-9)
        assert float(row["ideal_departure"]) == pytest.approx(s, abs=1e-9)
        assert float(row["free_flow_departure"]) == pytest.approx(a + 1.0, abs=1e-9)

    sched = tmp_path / "schedule.csv"
    write_schedule_csv(sched, rows[0].arrivals, rows[0].departures, rows[0].ideal)
    with open(sched, newline="") as f:
        sc = list(csv.DictReader(f))
    total = sum(
        float(row["deviation_cost"]) + 1.0 * float(row["sojourn"]) for row in sc
    )
    assert total == pytest.approx(rows[0].value, abs=1e-8)


def test_csv_writers_deterministic(tmp_path):
    spec = ExperimentSpec(n_values=(2,), gamma_values=(0.7,))
    rows = run_experiment(spec)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    # wall time differs between runs; rewrite the same result twice instead
    write_summary_csv(p1, rows)
    write_summary_csv(p2, rows)
    assert p1.read_bytes() == p2.read_bytes()


def test_empty_grid():
    spec = ExperimentSpec(n_values=(), gamma_values=(1.0,))
    assert run_experiment(spec) == []
    with pytest.raises(ValueError):
        ExperimentSpec(n_values=(0,), gamma_values=(1.0,))
