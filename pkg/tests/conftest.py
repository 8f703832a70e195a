import numpy as np
import pytest

from kerrfloquet.params import SystemParams, params_from_rwa


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def duffing():
    return SystemParams(m=1.0, omega0=1.0, alpha=0.01, F=0.02, omega=1.1, gamma=0.0, hbar=1.0)


@pytest.fixture
def fig2a():
    return params_from_rwa(1e-2, 1e-4, gamma=2.5e-3)
