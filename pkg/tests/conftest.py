"""Shared pytest fixtures for waveform, design and ambiguity tests."""

import os
import pytest
from pathlib import Path
import sys

# Add repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from pqtrain.config import get_settings


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Isolate every test from PQTRAIN_* variables and cached settings."""
    for key in list(os.environ):
        if key.startswith('PQTRAIN_'):
            monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def repo_root():
    """Path to the repository root."""
    return Path(__file__).parent.parent


@pytest.fixture
def demo_scene_path(repo_root):
    """Path to the shipped demo scene."""
    return repo_root / 'scenes' / 'demo.scene'


# Waveform fixtures
@pytest.fixture(scope='session')
def golay64():
    """Canonical length-64 Golay pair."""
    from pqtrain.services.waveforms import golay_pair
    return golay_pair(64)


@pytest.fixture(scope='session')
def golay16():
    """Canonical length-16 Golay pair."""
    from pqtrain.services.waveforms import golay_pair
    return golay_pair(16)


# Design fixtures
@pytest.fixture(scope='session')
def ptm16():
    from pqtrain.services.designs import ptm_design
    return ptm_design(16)


@pytest.fixture(scope='session')
def binomial16():
    from pqtrain.services.designs import binomial_design
    return binomial_design(16)


@pytest.fixture(scope='session')
def conventional16():
    from pqtrain.services.designs import conventional_design
    return conventional_design(16)


@pytest.fixture(scope='session')
def maxsnr16_8():
    """Max-SNR design for N=16, M=8 as (design, r, kkt_report)."""
    from pqtrain.services.designs import max_snr_design
    return max_snr_design(16, 8)


@pytest.fixture(scope='session')
def quad_design():
    """D=4 product of two binomial N=4 factors."""
    from pqtrain.services.designs import binomial_design, compose_dary
    return compose_dary([binomial_design(4), binomial_design(4)])
