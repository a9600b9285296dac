import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from treeshift.tree import build_kary, build_ray, build_t20
from treeshift.weights import kary_weights, ones, t20_weights

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def t20_60():
    return t20_weights(build_t20(60))


@pytest.fixture(scope="session")
def kary3():
    return kary_weights(build_kary(3, 6))


@pytest.fixture(scope="session")
def ray_ones():
    return ones(build_ray(40))
