import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blochasym import asymptotic_constants, cosine_potential, make_lattice, make_potential

settings.register_profile("default", max_examples=40, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("default")

TWO_PI = 2 * np.pi


@pytest.fixture(scope="session")
def lat():
    return make_lattice(np.eye(2))


@pytest.fixture(scope="session")
def consts():
    return asymptotic_constants(2, 45)


@pytest.fixture(scope="session")
def two_mode(lat):
    """q(x) = 2 cos((2 pi, 0) . x)."""
    return make_potential(lat, [((1, 0), 1.0, 0.0)])


@pytest.fixture(scope="session")
def zero_pot(lat):
    return make_potential(lat, [])


@pytest.fixture(scope="session")
def cosine(lat):
    return lambda strength: cosine_potential(lat, strength)
