import sys
from pathlib import Path

import pytest

import cknlab as ck

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def t1():
    """Reference configuration: N=3, alpha=0, beta=0.15, lambda=0."""
    return ck.derive_ab(3, 0.0, 0.15, 0.0)


@pytest.fixture(scope="session")
def grid(t1):
    return ck.default_grid(t1)


@pytest.fixture(scope="session")
def grid_small(t1):
    return ck.default_grid(t1, n=512)


@pytest.fixture(scope="session")
def bump():
    return ck.make_self_dual_bump(0.5)


@pytest.fixture(scope="session")
def bump_neg():
    return ck.make_self_dual_bump(-0.5)


@pytest.fixture(scope="session")
def k_one():
    return ck.constant(1.0)


@pytest.fixture(scope="session")
def z1_profile(t1, grid):
    return ck.make_instanton(t1, grid)
