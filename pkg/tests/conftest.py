import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "meandev",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("meandev")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240817))
