import numpy as np
import pytest

from sharesched.model import Instance


def random_instance(rng, n, gamma=1.0, spread=None):
    """Random feasible instance: rate stays positive with all n users present."""
    beta = rng.uniform(0.5, 3.0)
    # Keep a safety margin so the rate floor is bounded away from zero.
    alpha = rng.uniform(0.0, 0.9) * beta / max(n - 1, 1)
    if spread is None:
        spread = n / (beta - alpha * (n - 1))
    d_star = np.sort(rng.uniform(0.0, spread, size=n))
    return Instance(n=n, alpha=alpha, beta=beta, gamma=gamma, d_star=tuple(d_star))


def random_arrivals(rng, instance, spread=None):
    if spread is None:
        spread = instance.n / instance.rate_floor
    return np.sort(rng.uniform(0.0, spread, size=instance.n))


@pytest.fixture
def three_user_instance():
    """Half-rate server losing 1/6 per extra user; the worked example used throughout."""
    return Instance(n=3, alpha=1.0 / 6.0, beta=0.5, gamma=1.0, d_star=(2.0, 3.0, 5.0))
