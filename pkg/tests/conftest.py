import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from spinhelix.elliptic import EllipticContext

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def complex_box(re=1.0, im=0.3):
    return st.builds(complex, st.floats(-re, re), st.floats(-im, im))


taus = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.5, 1.5))


@pytest.fixture
def ctx08():
    return EllipticContext(0.8j)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _no_small_tau_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        yield
