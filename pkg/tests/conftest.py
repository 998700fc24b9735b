"""
Shared fixtures for the unit suite: Monte Carlo settings and seeded point sets.
"""
import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from lib.engine.types import McConfig


@pytest.fixture
def mc():
    """Monte Carlo settings sized for unit tests."""
    return McConfig(sample_count=200_000, seed=20240601, stream_count=4)


@pytest.fixture
def small_mc():
    return McConfig(sample_count=20_000, seed=7, stream_count=4)


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture
def grid_2d():
    """Bivariate points including zero coordinates."""
    return np.array([[1.0, 1.0], [1.0, 2.0], [0.3, 0.9], [2.0, 0.0], [0.0, 1.5], [0.7, 0.2]])
