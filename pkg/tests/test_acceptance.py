"""
End-to-end reference scenarios. Slow: run with ``pytest -m slow``.
"""

import numpy as np
import pytest
from scipy.optimize import brentq

from qtl.core.schemas import parse_scenario
from qtl.experiments import ExperimentFactory
from qtl.physics.theory import spectral_temperature_of
from qtl.physics.spectra import Spectrum
from qtl.presets import load_preset

pytestmark = pytest.mark.slow


def execute(config, tmp_path):
    return ExperimentFactory.create(config.experiment, config).execute(tmp_path)


def run(config):
    return ExperimentFactory.create(config.experiment, config).run()


def entropy_fraction_above(threshold, low=0.15, degeneracy=50):
    """
    Exact fraction of the two-level histogram scenario with S^g above ``threshold``.

    The gas coherence is sqrt(W0 W1) <v0|v1> with independent Haar vectors, so
    x = |<v0|v1>|^2 is Beta(1, N - 1) distributed and S^g falls with x.
    """
    def binary(p):
        return -(p * np.log(p) + (1.0 - p) * np.log(1.0 - p))

    p_min = brentq(lambda p: binary(p) - threshold, 1e-9, low)
    x_max = ((0.5 - p_min) ** 2 - (0.5 - low) ** 2) / (low * (1.0 - low))
    return 1.0 - (1.0 - x_max) ** (degeneracy - 1)


def test_accessible_region_histogram(tmp_path):
    report = execute(load_preset("histogram"), tmp_path)
    rows = dict(report.rows)
    assert rows["samples"] == 100_000
    assert abs(rows["mean_purity"] - 0.7501) < 0.002
    assert rows["purity_stderr"] < 1e-4
    assert rows["fraction_S_below_0.2"] < 0.001
    assert rows["fraction_S_below_0.3"] < 0.01
    fraction = rows["fraction_S_above_0.4"]
    print(f"fraction of samples with S > 0.4: {fraction:.4f} (closed form {entropy_fraction_above(0.4):.4f})")
    assert fraction == pytest.approx(entropy_fraction_above(0.4), abs=0.003)
    assert fraction > 0.95
    assert rows["mode_bin"] >= rows["bins"] - 2


def test_microcanonical_relaxation():
    result = run(load_preset("micro-2x50"))
    for trajectory_run in result.runs:
        plateaus = trajectory_run.plateaus(0.25)
        assert 0.40 <= plateaus["S_g"] <= 0.4228
        assert plateaus["W_g_0"] == pytest.approx(0.15, abs=1e-10)
        assert trajectory_run.drifts()["joint_drift"] < 1e-10


@pytest.mark.parametrize(
    "delta, t_end",
    [(0.0075, 200.0), (0.002, 400.0)],
)
def test_canonical_relaxation(delta, t_end):
    data = load_preset("canonical-2x3").model_dump(mode="json", by_alias=True)
    data["interaction"]["deltaI"] = delta
    data["times"]["t_end"] = t_end
    data["initial_states"] = [
        {"gas_weights": [w, 1.0 - w], "container_level": 1} for w in (0.1, 0.5, 0.9)
    ]
    data["seeds"] = [1, 2]
    config = parse_scenario(data)
    result = run(config)
    assert len(result.runs) == 6
    for trajectory_run in result.runs:
        plateaus = trajectory_run.plateaus(0.25)
        assert plateaus["W_g_0"] == pytest.approx(2 / 3, abs=0.05)
        assert plateaus["S_g"] == pytest.approx(0.637, abs=0.03)


def test_five_level_canonical_form():
    result = run(load_preset("canonical-5x5"))
    weights = np.array([
        value for key, value in result.runs[0].plateaus(0.25).items() if key.startswith("W_g_")
    ])
    assert np.allclose(weights[:-1] / weights[1:], 2.0, atol=0.3)

    gas = Spectrum.from_pairs([(e, 1) for e in range(5)])
    beta = spectral_temperature_of(weights / weights.sum(), gas)
    assert beta == pytest.approx(np.log(2), abs=0.15)


def test_fluctuation_scaling(tmp_path):
    report = execute(load_preset("fluctuation-sweep"), tmp_path)
    rows = dict(report.rows)
    assert rows["exponent"] == pytest.approx(0.5, abs=0.1)
