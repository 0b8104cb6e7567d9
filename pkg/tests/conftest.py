import pytest

from isotower.arithmetic import make_field
from isotower.graphs import BuildParams, build_graph
from isotower.utilities import Settings


@pytest.fixture(scope="session")
def settings():
    return Settings()


@pytest.fixture(scope="session")
def f5():
    return make_field(5, 1)


@pytest.fixture(scope="session")
def f25():
    return make_field(5, 2)


@pytest.fixture(scope="session")
def g50(settings):
    """G_1^0 for p = 5, l = 2: four ordinary j-invariants."""
    return build_graph(BuildParams(p=5, ell=2, N=1, m=0), settings)


@pytest.fixture(scope="session")
def g51(settings):
    return build_graph(BuildParams(p=5, ell=2, N=1, m=1), settings)
