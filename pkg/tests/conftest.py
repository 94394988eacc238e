import pytest
from hypothesis import HealthCheck, settings

# JIT warm-up and simulation calls make wall-time erratic; disable deadlines.
settings.register_profile("softgait", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("softgait")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    from softgait.experiment.runner import warmup

    warmup()
