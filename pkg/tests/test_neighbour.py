import numpy as np
import pytest

from sharesched.dynamics import forward_dynamics
from sharesched.exhaustive import enumerate_profiles, exhaustive_search
from sharesched.model import Instance, OrderProfile
from sharesched.neighbour import active_index_sets, neighbour_search

from conftest import random_arrivals, random_instance


def test_active_sets_touching_arrival():
    # first departure lands exactly on the second arrival
    inst = Instance(n=2, alpha=0.0, beta=1.0, gamma=0.0, d_star=(0.0, 0.0))
    prof = OrderProfile(k=(1, 2), h=(1, 2))
    I1, I2 = active_index_sets(inst, prof, [0.0, 1.0])
    assert I1 == [1]
    assert I2 == []


def test_descent_is_strict_and_certified():
    rng = np.random.default_rng(61)
    for _ in range(30):
        inst = random_instance(rng, int(rng.integers(2, 7)), gamma=rng.uniform(0, 3))
        a = random_arrivals(rng, inst)
        prof = forward_dynamics(inst, a).profile
        res = neighbour_search(inst, prof)
        vals = np.array(res.values)
        assert np.all(np.diff(vals) < 0)
        assert res.moves == len(vals) - 1
        for v in res.certificate:
            assert v >= res.value - 1e-8


def test_never_below_global():
    rng = np.random.default_rng(62)
    for _ in range(15):
        inst = random_instance(rng, int(rng.integers(2, 6)), gamma=rng.uniform(0, 2))
        glob = exhaustive_search(inst)
        a = random_arrivals(rng, inst)
        res = neighbour_search(inst, forward_dynamics(inst, a).profile)
        assert res.value >= glob.value - 1e-9


def test_start_at_global_stays():
    rng = np.random.default_rng(63)
    inst = random_instance(rng, 5, gamma=1.0)
    glob = exhaustive_search(inst)
    res = neighbour_search(inst, glob.profile, start=glob.arrivals)
    assert res.value == pytest.approx(glob.value, abs=1e-9)
    assert res.moves == 0


def test_single_user_trivial():
    inst = Instance(n=1, alpha=0.2, beta=1.0, gamma=0.5, d_star=(2.0,))
    res = neighbour_search(inst, next(enumerate_profiles(1)))
    assert res.moves == 0
    assert res.certificate == ()
    # lone user: depart exactly on time, pay only the sojourn
    assert res.value == pytest.approx(0.5 * 1.0, abs=1e-8)
