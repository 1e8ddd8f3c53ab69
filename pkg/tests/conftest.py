import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Numba-backed calls can be arbitrarily slow on their first (compiling)
# execution, so wall-clock deadlines are meaningless here.
settings.register_profile(
    "nlfa",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("nlfa")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
