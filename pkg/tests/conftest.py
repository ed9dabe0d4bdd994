import numpy as np
import pytest

from attack_sim.channel import Scenario


@pytest.fixture
def wifi():
    """5 GHz, 200 mW Alice, default noise: the worked link-budget example."""
    return Scenario(5e9, alice_tx_power=0.2)


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)
