import pytest

from softgrip import default_capacity_model, default_geometry


@pytest.fixture(scope="session")
def geom():
    return default_geometry()


@pytest.fixture(scope="session")
def capacity():
    return default_capacity_model()
