"""
Shared pytest fixtures
Seeded generators, small synthetic datasets and SU samples
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from su_learning.config import get_settings
from su_learning.data.datasets import generate_gaussian, sample_su
from su_learning.models.data_models import SyntheticSpec


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Settings are re-read for every test so SU_* overrides stay local"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gaussian_spec():
    return SyntheticSpec.isotropic(d=2, separation=3.0, pi_plus=0.7, seed=7)


@pytest.fixture
def labeled_pool(gaussian_spec):
    return generate_gaussian(gaussian_spec, 3_000)


@pytest.fixture
def test_set(gaussian_spec):
    return generate_gaussian(gaussian_spec.with_seed(99), 5_000)


@pytest.fixture
def su_data(labeled_pool):
    return sample_su(labeled_pool, 0.7, n_s=150, n_u=200, seed=3)


@pytest.fixture
def small_su(labeled_pool):
    return sample_su(labeled_pool, 0.7, n_s=30, n_u=40, seed=5)
