import functools

import pytest

from nonlocal_networks import builtin_diamond
from nonlocal_networks.runner import run_and_measure


@functools.lru_cache(maxsize=None)
def diamond_run(model: str, eta: float = 0.5):
    """Full T=20 diamond run, cached across the session (each takes a few seconds)."""
    return run_and_measure(builtin_diamond(eta=eta, model=model))


@pytest.fixture(scope="session")
def diamond():
    return diamond_run
