"""
Test configuration module for ticketforge tests.

Provides configuration fixtures, small target networks and tickets that are
constructed once per session and shared by the construction, verification,
format and CLI tests.
"""

import pytest
import tempfile
import yaml
from dataclasses import replace
from pathlib import Path
from typing import Dict, Any

from src.core.config import ConfigLoader, TicketForgeConfig
from src.construct import construct_2L, construct_L_plus_1
from src.formats import gen_target, save_model, save_ticket
from src.network.network import Network
from src.network.ticket import Ticket


def fast_config(**construction: Any) -> TicketForgeConfig:
    """Loose budget and a 16-neuron pool: small targets construct in well under a second."""
    config = TicketForgeConfig()
    settings = {"eps": 0.2, "pool": 16, "seed": 0, "retries": 3, "spare_rows": 16}
    settings.update(construction)
    config.construction = replace(config.construction, **settings)
    config.verify = replace(config.verify, samples=2000)
    return config


@pytest.fixture
def sample_config_dict() -> Dict[str, Any]:
    """Sample configuration dictionary for testing."""
    return {
        "CONSTRUCTION": {
            "MODE": "l+1",
            "EPS": 0.05,
            "DELTA": 0.05,
            "POOL": 15,
            "POOL_SIZING": "auto",
            "POOL_LIMIT": 24,
            "SEED": 7,
            "RETRIES": 3,
            "SPARE_ROWS": 16,
            "TOLERANCE_POLICY": "lemma",
            "CARRIER_TOLERANCE": 0.1,
            "MAX_SUBSET_SIZE": None,
            "FIRST_ACTIVATION": None,
            "BEST_EFFORT": False,
            "WORKERS": 1,
        },
        "SOLVER": {
            "METHOD": "auto",
            "EXHAUSTIVE_LIMIT": 25,
            "MITM_LIMIT": 44,
        },
        "BOUNDS": {
            "C": 1.0,
            "GAMMA": 0.1,
            "NORMS": "interval",
            "SAMPLED_SAFETY": 1.05,
            "UNDERFLOW": 1e-12,
        },
        "VERIFY": {
            "SAMPLES": 10000,
            "SEED": 0,
            "CORNER_LIMIT": 4096,
        },
        "BENCH": {
            "TRIALS": 1000,
            "DISTRIBUTIONS": ["uniform", "product"],
            "EPS_GRID": [0.1, 0.01],
            "M_GRID": [5, 10],
        },
        "LOGGING": {
            "LEVEL": "INFO",
        },
    }


@pytest.fixture
def sample_ticketforge_config() -> TicketForgeConfig:
    """Default TicketForgeConfig object for testing."""
    return TicketForgeConfig()


@pytest.fixture
def temp_config_file(sample_config_dict) -> Path:
    """Create a temporary config file for testing."""
    with tempfile.NamedTemporaryFile(mode='w', suffix='.yaml', delete=False) as f:
        yaml.dump(sample_config_dict, f)
        return Path(f.name)


@pytest.fixture
def config_loader() -> ConfigLoader:
    """ConfigLoader instance for testing."""
    return ConfigLoader()


@pytest.fixture
def quick_config() -> TicketForgeConfig:
    """Fresh fast construction config; tests may modify it."""
    return fast_config()


@pytest.fixture(scope="session")
def small_target() -> Network:
    """Dense depth-2 ReLU target 2 -> 3 -> 1."""
    return gen_target([2, 3, 1], "relu", seed=1)


@pytest.fixture(scope="session")
def tanh_target() -> Network:
    """Dense depth-2 tanh target 2 -> 3 -> 1."""
    return gen_target([2, 3, 1], "tanh", seed=2)


@pytest.fixture(scope="session")
def l1_ticket(small_target) -> Ticket:
    """L+1 ticket of ``small_target``."""
    return construct_L_plus_1(small_target, fast_config())


@pytest.fixture(scope="session")
def twol_ticket(small_target) -> Ticket:
    """2L ticket of ``small_target``."""
    return construct_2L(small_target, fast_config(mode="2l"))


@pytest.fixture(scope="session")
def tanh_ticket(tanh_target) -> Ticket:
    """2L ticket of ``tanh_target`` built from looks-linear mirror pairs."""
    return construct_2L(tanh_target, fast_config(mode="2l"))


@pytest.fixture
def model_file(small_target, tmp_path) -> Path:
    """``small_target`` written as a model file."""
    path = tmp_path / "target.json"
    save_model(small_target, path)
    return path


@pytest.fixture
def ticket_file(l1_ticket, tmp_path) -> Path:
    """``l1_ticket`` written as a ticket file."""
    path = tmp_path / "ticket.json"
    save_ticket(l1_ticket, path)
    return path


@pytest.fixture
def fast_config_file(tmp_path) -> Path:
    """YAML file holding ``fast_config()``."""
    path = tmp_path / "fast.yaml"
    with open(path, 'w', encoding='utf-8') as f:
        yaml.dump(fast_config().to_dict(), f)
    return path
