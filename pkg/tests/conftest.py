"""
Shared fixtures.

Settings are cached process-wide; every test starts from a clean cache so
environment overrides made with monkeypatch take effect and do not leak.
"""

import pytest

from phi4lambert.config import get_settings
from phi4lambert.schemas import QuadSpec


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def spec() -> QuadSpec:
    """Default tolerances."""
    return QuadSpec.from_settings()


@pytest.fixture
def fast_spec() -> QuadSpec:
    """Looser tolerances for integrals nested inside other integrals."""
    return QuadSpec(abs_tol=1e-9, rel_tol=1e-9, max_subdivisions=500, tail_cutoff=1e3)
