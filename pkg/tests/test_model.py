import numpy as np
import pytest

from sharesched.model import (
    Instance,
    InvariantError,
    OrderProfile,
    Schedule,
    bounds,
    h_from_k,
    k_from_h,
    order,
    total_cost,
)

from conftest import random_instance


def test_rate():
    inst = Instance(n=3, alpha=1 / 6, beta=0.5, gamma=1.0, d_star=(2.0, 3.0, 5.0))
    assert inst.rate(1) == 0.5
    assert inst.rate(3) == pytest.approx(0.5 - 2 / 6)
    assert inst.rate_floor == pytest.approx(1 / 6)


def test_validation():
    with pytest.raises(InvariantError, match="not sorted"):
        Instance(n=2, alpha=0.1, beta=1.0, gamma=0.0, d_star=(2.0, 1.0))
    with pytest.raises(InvariantError):
        Instance(n=3, alpha=0.5, beta=1.0, gamma=0.0, d_star=(1.0, 2.0, 3.0))
    with pytest.raises(InvariantError):
        Instance(n=2, alpha=0.1, beta=0.0, gamma=0.0, d_star=(1.0, 2.0))
    with pytest.raises(InvariantError):
        Instance(n=2, alpha=-0.1, beta=1.0, gamma=0.0, d_star=(1.0, 2.0))
    with pytest.raises(InvariantError):
        Instance(n=3, alpha=0.1, beta=1.0, gamma=0.0, d_star=(1.0, 2.0))


def test_bounds():
    inst = Instance(n=3, alpha=1 / 6, beta=0.5, gamma=1.0, d_star=(2.0, 3.0, 5.0))
    a_lo, a_hi = bounds(inst)
    # slowest rate is 1/6, so one unit of work takes at most 18 time units
    assert a_lo == pytest.approx(2.0 - 18.0)
    assert a_hi == pytest.approx(5.0 + 18.0)


def test_total_cost():
    inst = Instance(n=2, alpha=0.0, beta=1.0, gamma=2.0, d_star=(1.0, 2.0))
    sched = Schedule(arrivals=(0.0, 1.0), departures=(1.0, 2.5))
    # deviation 0.25, sojourn 1 + 1.5
    assert total_cost(inst, sched) == pytest.approx(0.25 + 2.0 * 2.5)
    with pytest.raises(InvariantError):
        total_cost(inst, Schedule(arrivals=(0.0, 1.0)))


def test_order_is_stable_sort():
    a = np.array([3.0, 1.0, 2.0, 1.0])
    assert np.array_equal(order(a), np.array([1.0, 1.0, 2.0, 3.0]))


def test_profile_validation():
    OrderProfile(k=(2, 3, 3), h=(1, 1, 2))  # fine
    with pytest.raises(InvariantError):
        OrderProfile(k=(2, 3, 3), h=(1, 2, 2))  # breaks duality
    with pytest.raises(InvariantError):
        OrderProfile(k=(1, 3, 3), h=(1, 1, 2))  # k not matching h
    with pytest.raises(InvariantError):
        OrderProfile(k=(2, 3, 2), h=(1, 1, 2))  # k decreasing
    with pytest.raises(InvariantError):
        OrderProfile(k=(2, 3, 3), h=(2, 2, 3))  # h_1 != 1


def test_profile_duality_three_users():
    # all five valid interleavings for n=3
    cases = {
        (1, 2, 3): (1, 2, 3),
        (2, 2, 3): (1, 1, 3),
        (1, 3, 3): (1, 2, 2),
        (2, 3, 3): (1, 1, 2),
        (3, 3, 3): (1, 1, 1),
    }
    for k, h in cases.items():
        assert tuple(h_from_k(k)) == h
        assert tuple(k_from_h(h)) == k
        OrderProfile(k=k, h=h)


def test_duality_round_trip_random():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = rng.integers(1, 12)
        k = []
        prev = 1
        for i in range(1, n + 1):
            lo = max(i, prev)
            prev = int(rng.integers(lo, n + 1))
            k.append(prev)
        k[-1] = n
        h = h_from_k(k)
        assert list(k_from_h(h)) == list(k)
        OrderProfile(k=tuple(k), h=tuple(h))


def test_random_instance_helper_is_feasible():
    rng = np.random.default_rng(0)
    for _ in range(50):
        inst = random_instance(rng, int(rng.integers(1, 20)))
        assert inst.rate_floor > 0
