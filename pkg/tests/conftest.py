import numpy as np
import pytest

from barwave.params import make_params

L, C = 1.8, 1.5


@pytest.fixture
def fig_params():
    """Eigenvalue-figure parameters (a/L = 2/5, c = 0.3)."""
    return make_params(0.3, 0.9, 0.7, 0.72, 1.8, 0.3)


@pytest.fixture
def near_params():
    return make_params(0.3, 0.99, 0.7, 0.9, L, C)


@pytest.fixture
def generic_params():
    """Off-centre damper, all dampers active, nothing critical."""
    return make_params(0.4, -0.3, 0.6, 0.72, L, C)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
