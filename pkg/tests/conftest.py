import pytest

from towercert.exactfield import make_field
from towercert.polyring import PolyRing
from towercert.tower import build_tower


@pytest.fixture(scope="session")
def spec():
    """lambda = (1, 2, 3): K = Q(sqrt(-6))."""
    return make_field(1, 2, 3)


@pytest.fixture(scope="session")
def square_spec():
    """lambda = (-1, 2, 1/2): the discriminant is 1 and K = Q."""
    return make_field(-1, 2, "1/2")


@pytest.fixture(scope="session")
def ctx(spec):
    return build_tower(spec, 3)


@pytest.fixture
def xy(spec):
    return PolyRing.of(("x", "y"), spec)


@pytest.fixture
def xyz_q(spec):
    return PolyRing.of(("x", "y", "z"), spec, rational=True)
