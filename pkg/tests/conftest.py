import numpy as np
import pytest

from polcoh.state_core import CoherentParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def fig_params():
    """The (alpha, beta) = (0.4, 5) right-handed state used throughout."""
    return CoherentParams(0.4, 5.0)


def random_params(rng, a_max=0.7, b_max=6.0, complex_=True):
    a = rng.uniform(0, a_max) * np.exp(1j * rng.uniform(0, 2 * np.pi) * complex_)
    b = rng.uniform(0, b_max) * np.exp(1j * rng.uniform(0, 2 * np.pi) * complex_)
    return CoherentParams(a, b, int(rng.choice([-1, 1])))
