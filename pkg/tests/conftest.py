import pytest

from fuzzyspec import operators


@pytest.fixture(scope="session")
def interval_small():
    return operators.build_interval_derivative(1, 64)


@pytest.fixture(scope="session")
def halfline_small():
    return operators.build_halfline_derivative(256, 12.0)


@pytest.fixture(scope="session")
def beta_small():
    return operators.build_beta_algebra(1.0, 20.0, 128)
