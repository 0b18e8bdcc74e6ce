import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("rg2flow", max_examples=60, deadline=None)
settings.load_profile("rg2flow")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sl2r_separatrix():
    from rg2flow import build_sl2r_separatrix
    return build_sl2r_separatrix(1.0, 10.0)
