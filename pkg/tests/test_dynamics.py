import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharesched.dynamics import (
    build_matrices,
    evaluate_cost,
    forward_dynamics,
    inverse_dynamics,
    simulate_oracle,
)
from sharesched.model import Instance, InvariantError, Schedule, total_cost

from conftest import random_arrivals, random_instance


def test_three_user_forward(three_user_instance):
    res = forward_dynamics(three_user_instance, [0.0, 1.0, 3.0])
    assert np.allclose(res.departures, [2.5, 3.75, 5.25], atol=1e-12)
    assert res.profile.k == (2, 3, 3)
    assert res.profile.h == (1, 1, 2)


def test_three_user_inverse(three_user_instance):
    res = inverse_dynamics(three_user_instance, [2.5, 3.75, 5.25])
    assert np.allclose(res.arrivals, [0.0, 1.0, 3.0], atol=1e-9)
    assert res.profile.k == (2, 3, 3)
    assert res.profile.h == (1, 1, 2)


def test_two_user_pin():
    # hand-solved: second user arrives mid-service, both slow to rate 1/2
    inst = Instance(n=2, alpha=0.5, beta=1.0, gamma=0.0, d_star=(0.0, 0.0))
    res = forward_dynamics(inst, [0.0, 0.5])
    assert np.allclose(res.departures, [1.5, 2.0], atol=1e-12)
    assert res.profile.k == (2, 2)
    assert res.profile.h == (1, 1)


def test_single_user():
    inst = Instance(n=1, alpha=0.7, beta=2.0, gamma=0.0, d_star=(1.0,))
    res = forward_dynamics(inst, [3.0])
    assert res.departures == (3.5,)
    assert res.profile.k == (1,) and res.profile.h == (1,)
    back = inverse_dynamics(inst, [3.5])
    assert back.arrivals == (3.0,)


def test_disjoint_users_free_flow():
    # arrivals far apart: everyone rides alone at rate beta
    inst = Instance(n=4, alpha=0.2, beta=1.0, gamma=0.0, d_star=(0.0,) * 4)
    a = [0.0, 10.0, 20.0, 30.0]
    res = forward_dynamics(inst, a)
    assert np.allclose(res.departures, [1.0, 11.0, 21.0, 31.0], atol=1e-12)
    assert res.profile.k == (1, 2, 3, 4)
    assert res.profile.h == (1, 2, 3, 4)


def test_simultaneous_arrivals():
    # everyone arrives at once and shares the full slowdown
    inst = Instance(n=3, alpha=0.2, beta=1.0, gamma=0.0, d_star=(0.0,) * 3)
    res = forward_dynamics(inst, [0.0, 0.0, 0.0])
    sojourn = 1.0 / (1.0 - 0.2 * 2)
    assert np.allclose(res.departures, [sojourn] * 3, atol=1e-9)
    assert res.profile.k == (3, 3, 3)


def test_forward_rejects_unsorted(three_user_instance):
    with pytest.raises(InvariantError, match="arrivals not sorted"):
        forward_dynamics(three_user_instance, [1.0, 0.0, 3.0])


def test_matrix_pin(three_user_instance):
    res = forward_dynamics(three_user_instance, [0.0, 1.0, 3.0])
    A, D = build_matrices(three_user_instance, res.profile)
    assert np.allclose(
        D,
        [[1 / 3, 0, 0], [-1 / 6, 1 / 3, 0], [0, -1 / 6, 1 / 2]],
    )
    assert np.allclose(
        A,
        [[1 / 2, -1 / 6, 0], [0, 1 / 3, -1 / 6], [0, 0, 1 / 3]],
    )


def test_balance_residual_random():
    rng = np.random.default_rng(12)
    for _ in range(200):
        inst = random_instance(rng, int(rng.integers(1, 15)))
        a = random_arrivals(rng, inst)
        res = forward_dynamics(inst, a)
        A, D = build_matrices(inst, res.profile)
        resid = D @ np.array(res.departures) - A @ a - 1.0
        assert np.max(np.abs(resid)) < 1e-9


def test_oracle_agreement():
    rng = np.random.default_rng(5)
    for _ in range(300):
        inst = random_instance(rng, int(rng.integers(1, 13)))
        a = random_arrivals(rng, inst)
        res = forward_dynamics(inst, a)
        sim = simulate_oracle(inst, a)
        assert np.allclose(res.departures, sim, atol=1e-9)


def test_round_trip_random():
    rng = np.random.default_rng(99)
    for _ in range(300):
        inst = random_instance(rng, int(rng.integers(1, 20)))
        a = random_arrivals(rng, inst)
        fwd = forward_dynamics(inst, a)
        back = inverse_dynamics(inst, fwd.departures)
        assert np.allclose(back.arrivals, a, atol=1e-9)
        assert back.profile == fwd.profile


def test_inverse_then_forward_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        inst = random_instance(rng, int(rng.integers(1, 15)))
        gaps = rng.uniform(0.05, 2.0, size=inst.n)
        d = np.cumsum(gaps) + 1.0 / inst.beta
        back = inverse_dynamics(inst, d)
        arr = np.array(back.arrivals)
        assert np.all(np.diff(arr) >= -1e-9)
        fwd = forward_dynamics(inst, np.maximum.accumulate(arr))
        assert np.allclose(fwd.departures, d, atol=1e-8)


def test_evaluation_counts():
    rng = np.random.default_rng(42)
    for _ in range(100):
        inst = random_instance(rng, int(rng.integers(1, 30)))
        a = random_arrivals(rng, inst)
        fwd = forward_dynamics(inst, a)
        assert fwd.evaluations <= 2 * inst.n
        back = inverse_dynamics(inst, fwd.departures)
        assert back.evaluations <= 2 * inst.n


def test_work_accounting():
    # integrating the service rate over each stay must give one unit of work
    rng = np.random.default_rng(21)
    for _ in range(50):
        inst = random_instance(rng, int(rng.integers(1, 10)))
        a = random_arrivals(rng, inst)
        d = np.array(forward_dynamics(inst, a).departures)
        events = np.unique(np.concatenate([a, d]))
        for i in range(inst.n):
            work = 0.0
            for lo, hi in zip(events[:-1], events[1:]):
                if lo >= d[i] or hi <= a[i]:
                    continue
                mid = 0.5 * (lo + hi)
                q = int(np.sum((a <= mid) & (mid < d)))
                work += inst.rate(q) * (hi - lo)
            assert work == pytest.approx(1.0, abs=1e-9)


def test_evaluate_cost_sorted_matches_schedule(three_user_instance):
    a = np.array([0.0, 1.0, 3.0])
    res = forward_dynamics(three_user_instance, a)
    sched = Schedule(arrivals=tuple(a), departures=res.departures)
    assert evaluate_cost(three_user_instance, a) == pytest.approx(
        total_cost(three_user_instance, sched), abs=1e-12
    )


def test_evaluate_cost_unordered_pairing():
    # swapping two users' arrivals keeps each user's own due date
    inst = Instance(n=2, alpha=0.0, beta=1.0, gamma=0.0, d_star=(1.0, 5.0))
    # user 1 arrives late, user 2 early; departures are 1.0 and 5.0 by rank
    c = evaluate_cost(inst, [4.0, 0.0])
    assert c == pytest.approx((5.0 - 1.0) ** 2 + (1.0 - 5.0) ** 2)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_departures_ordered_and_after_arrival(data):
    n = data.draw(st.integers(1, 8))
    beta = data.draw(st.floats(0.3, 3.0))
    frac = data.draw(st.floats(0.0, 0.9))
    alpha = frac * beta / max(n - 1, 1)
    gaps = data.draw(
        st.lists(st.floats(0.0, 5.0), min_size=n, max_size=n)
    )
    a = np.cumsum(gaps)
    inst = Instance(n=n, alpha=alpha, beta=beta, gamma=0.0, d_star=tuple(range(n)))
    res = forward_dynamics(inst, a)
    d = np.array(res.departures)
    assert np.all(np.diff(d) >= -1e-9)
    assert np.all(d - a >= 1.0 / beta - 1e-9)
