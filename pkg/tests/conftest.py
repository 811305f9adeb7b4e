"""Shared fixtures: the reference composites, seeded generators and isolated settings."""

import numpy as np
import pytest

from qtl.config import Settings, get_settings
from qtl.physics.spectra import Spectrum, build_composite


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch, tmp_path):
    """Every test gets default settings and a private output directory."""
    monkeypatch.setenv("QTL_OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.delenv("QTL_MAX_WORKERS", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def two_level_gas():
    return Spectrum.from_pairs([(0, 1), (1, 1)])


@pytest.fixture
def micro_composite(two_level_gas):
    """Two-level gas, single container level of degeneracy 50 (dimension 100)."""
    return build_composite(two_level_gas, Spectrum.from_pairs([(0, 50)]))


@pytest.fixture
def canonical_composite(two_level_gas):
    """Two-level gas, container degeneracies 50, 100, 200 (dimension 700)."""
    return build_composite(two_level_gas, Spectrum.from_pairs([(0, 50), (1, 100), (2, 200)]))


@pytest.fixture
def five_level_composite():
    """Non-degenerate five-level gas, container degeneracies 6 * 2^B (dimension 930)."""
    gas = Spectrum.from_pairs([(e, 1) for e in range(5)])
    container = Spectrum.from_pairs([(b, 6 * 2**b) for b in range(5)])
    return build_composite(gas, container)


@pytest.fixture
def small_composite():
    """Degenerate levels on both sides, dimension 9."""
    gas = Spectrum.from_pairs([(0, 1), (1, 2)])
    container = Spectrum.from_pairs([(0, 2), (1, 1)])
    return build_composite(gas, container)


@pytest.fixture
def fast_settings():
    return Settings(histogram_batch_size=512, max_workers=1)


def scenario_data(**overrides) -> dict:
    """A small canonical scenario document (dimension 42) for experiment tests."""
    data = {
        "name": "tiny",
        "experiment": "evolve",
        "gas": {"levels": [[0, 1], [1, 1]]},
        "container": {"levels": [[0, 3], [1, 6], [2, 12]]},
        "interaction": {"kind": "full", "deltaI": 0.02},
        "initial_states": [{"gas_weights": [0.0, 1.0], "container_level": 1}],
        "times": {"t_end": 50.0, "samples": 200},
        "seeds": [1, 2],
    }
    data.update(overrides)
    return data
