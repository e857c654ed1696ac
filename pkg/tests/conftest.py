import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from focklab.quadcore import QuadSpec
from focklab.weights import make_weight

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=25,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture
def spec():
    return QuadSpec()


@pytest.fixture
def one():
    return make_weight("constant")


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
