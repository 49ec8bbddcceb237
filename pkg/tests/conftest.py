import math

import pytest
from hypothesis import HealthCheck, settings

from warpgeo.geometry import ConstantWarp, SequenceWarp
from warpgeo.grid import GridGraph, GridSpec

settings.register_profile(
    "ci",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def small_spec():
    return GridSpec(17, 16, 16)


@pytest.fixture(scope="session")
def small_graph(small_spec):
    return GridGraph(small_spec)


@pytest.fixture(scope="session")
def medium_spec():
    return GridSpec(33, 32, 32)


@pytest.fixture(scope="session")
def medium_graph(medium_spec):
    return GridGraph(medium_spec)


@pytest.fixture(scope="session")
def tube_spec():
    return GridSpec(33, 32, 32, tube_radius=0.3)


@pytest.fixture(scope="session")
def tube_graph(tube_spec):
    return GridGraph(tube_spec)
