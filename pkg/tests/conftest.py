import numpy as np
import pytest

from shelfguide.hand_model import synthetic_default_model
from shelfguide.reach_mdp import solve


@pytest.fixture(scope="session")
def model():
    return synthetic_default_model()


@pytest.fixture(scope="session")
def policy(model):
    """Full default solve; shared because it costs a couple of seconds."""
    return solve(model)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
