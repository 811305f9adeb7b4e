import numpy as np
import pytest

from qtl.core.exceptions import ValidationError
from qtl.physics.spectra import Spectrum, build_composite
from qtl.physics.states import purity, von_neumann_entropy
from qtl.physics.theory import (
    LevelDistribution,
    Subsystem,
    TotalEnergyDistribution,
    canonical_distribution,
    dominant_distribution,
    equilibrium_state,
    fit_exponential_degeneracy,
    hs_average_purity_approx,
    hs_average_purity_dominant,
    hs_average_purity_exact,
    max_entropy,
    min_purity,
    predict,
    predicted_distribution,
    spectral_temperature,
    spectral_temperature_of,
    total_energy_distribution,
)

tol = 1e-12


def test_microcanonical_reference_values(micro_composite):
    gas, container = micro_composite.gas, micro_composite.container
    weights = [0.15, 0.85]
    assert min_purity(weights, gas) == pytest.approx(0.745, abs=tol)
    assert hs_average_purity_approx(weights, [1.0], gas, container) == pytest.approx(0.765, abs=tol)
    assert hs_average_purity_exact(weights, [1.0], gas, container) == pytest.approx(0.7501, abs=tol)
    assert abs(max_entropy(weights, gas) - 0.423) < 0.001


def test_exact_average_approaches_approximation():
    gas = Spectrum.from_pairs([(0, 400), (1, 600)])
    container = Spectrum.from_pairs([(0, 500), (1, 900)])
    exact = hs_average_purity_exact([0.4, 0.6], [0.3, 0.7], gas, container)
    approx = hs_average_purity_approx([0.4, 0.6], [0.3, 0.7], gas, container)
    assert abs(exact - approx) / approx < 0.01


def test_max_entropy_of_degenerate_levels():
    gas = Spectrum.from_pairs([(0, 1), (1, 3)])
    # uniform over all four states
    assert max_entropy([0.25, 0.75], gas) == pytest.approx(np.log(4), abs=tol)
    assert max_entropy([1.0, 0.0], gas) == pytest.approx(0.0, abs=tol)


def test_energy_distribution_of_product_state(canonical_composite):
    energy = total_energy_distribution([0.1, 0.9], [0.0, 1.0, 0.0], canonical_composite)
    assert energy.probabilities == pytest.approx({0: 0.0, 1: 0.1, 2: 0.9, 3: 0.0}, abs=tol)
    assert energy[5] == 0.0


@pytest.mark.parametrize("gas_weights", [[0.0, 1.0], [0.1, 0.9], [0.5, 0.5], [0.9, 0.1]])
def test_canonical_dominant_distribution(canonical_composite, gas_weights):
    energy = total_energy_distribution(gas_weights, [0.0, 1.0, 0.0], canonical_composite)
    dominant = dominant_distribution(energy, canonical_composite)
    assert np.allclose(dominant.weights, [2 / 3, 1 / 3], atol=tol)
    assert abs(max_entropy(dominant, canonical_composite.gas) - 0.637) < 0.001


def test_container_dominant_distribution(canonical_composite):
    energy = TotalEnergyDistribution({1: 1.0})
    dominant = dominant_distribution(energy, canonical_composite, Subsystem.CONTAINER)
    assert np.allclose(dominant.weights, [1 / 3, 2 / 3, 0.0], atol=tol)


def test_five_level_ratios_and_canonical_form(five_level_composite):
    gas = five_level_composite.gas
    dominant = dominant_distribution(TotalEnergyDistribution({4: 1.0}), five_level_composite)
    ratios = dominant.weights[:-1] / dominant.weights[1:]
    assert np.allclose(ratios, 2.0, atol=tol)
    assert np.allclose(canonical_distribution(gas, np.log(2)).weights, dominant.weights, atol=tol)


def test_dominant_rejects_weight_outside_shells(micro_composite):
    with pytest.raises(ValidationError):
        dominant_distribution(TotalEnergyDistribution({5: 1.0}), micro_composite)


def test_predicted_distribution_without_exchange(canonical_composite):
    kept = predicted_distribution(canonical_composite, [0.1, 0.9], [0.0, 1.0, 0.0], energy_exchange=False)
    assert np.allclose(kept.weights, [0.1, 0.9], atol=tol)


@pytest.mark.parametrize(
    "pairs, alpha, n0",
    [
        ([(0, 50), (1, 100), (2, 200)], np.log(2), 50.0),
        ([(b, 6 * 2**b) for b in range(5)], np.log(2), 6.0),
    ],
)
def test_exponential_fit(pairs, alpha, n0):
    fit = fit_exponential_degeneracy(Spectrum.from_pairs(pairs))
    assert fit.alpha == pytest.approx(alpha, abs=1e-10)
    assert fit.n0 == pytest.approx(n0, rel=1e-10)
    assert fit.is_exact


def test_exponential_fit_needs_two_levels():
    with pytest.raises(ValidationError):
        fit_exponential_degeneracy(Spectrum.from_pairs([(0, 50)]))


@pytest.mark.parametrize("alpha", [0.1, np.log(2), 3.0])
def test_spectral_temperature_recovers_boltzmann(alpha):
    energies = np.array([0.0, 1.0, 2.0, 3.0])
    degeneracies = np.array([1, 3, 2, 5])
    weights = degeneracies * np.exp(-alpha * energies)
    weights /= weights.sum()
    levels = list(zip(energies, degeneracies, weights))
    assert spectral_temperature(levels) == pytest.approx(alpha, abs=tol)


@pytest.mark.parametrize("alpha", [0.1, np.log(2), 3.0])
def test_spectral_temperature_inverts_canonical_distribution(five_level_composite, alpha):
    gas = five_level_composite.gas
    assert spectral_temperature_of(canonical_distribution(gas, alpha), gas) == pytest.approx(alpha, abs=tol)


def test_infinite_temperature():
    assert spectral_temperature([(0.0, 1, 0.5), (1.0, 1, 0.5)]) == pytest.approx(0.0, abs=tol)


def test_spectral_temperature_of_canonical_gas(canonical_composite):
    assert spectral_temperature_of([2 / 3, 1 / 3], canonical_composite.gas) == pytest.approx(np.log(2), abs=tol)


def test_spectral_temperature_floors_empty_levels():
    beta = spectral_temperature([(0.0, 1, 1.0), (1.0, 1, 0.0)])
    assert np.isfinite(beta)
    assert beta > 0.0


@pytest.mark.parametrize(
    "levels",
    [
        [(0.0, 1, 1.0)],
        [(0.0, 1, 0.5), (1.0, 1, 0.6)],
        [(1.0, 1, 0.5), (0.0, 1, 0.5)],
        [(0.0, 0, 0.5), (1.0, 1, 0.5)],
    ],
)
def test_spectral_temperature_rejects_bad_input(levels):
    with pytest.raises(ValidationError):
        spectral_temperature(levels)


def test_equilibrium_state_reproduces_closed_forms():
    gas = Spectrum.from_pairs([(0, 1), (1, 2), (2, 3)])
    weights = [0.2, 0.3, 0.5]
    rho = equilibrium_state(weights, gas)
    assert purity(rho) == pytest.approx(min_purity(weights, gas), abs=tol)
    assert von_neumann_entropy(rho) == pytest.approx(max_entropy(weights, gas), abs=1e-10)


def test_level_distribution_validation():
    with pytest.raises(ValidationError):
        LevelDistribution(np.array([0.5, 0.4]))
    with pytest.raises(ValidationError):
        LevelDistribution(np.array([]))
    with pytest.raises(ValidationError):
        min_purity([0.2, 0.3, 0.5], Spectrum.from_pairs([(0, 1), (1, 1)]))


def test_predict_microcanonical(micro_composite):
    prediction = predict(micro_composite, [0.15, 0.85], [1.0], energy_exchange=False)
    rows = dict(prediction.rows())
    assert rows["min_purity"] == pytest.approx(0.745, abs=tol)
    assert rows["hs_average_purity_exact"] == pytest.approx(0.7501, abs=tol)
    assert rows["equilibrium_W_g_0"] == pytest.approx(0.15, abs=tol)
    assert prediction.fit is None
    assert prediction.notes


def test_predict_canonical(canonical_composite):
    prediction = predict(canonical_composite, [0.9, 0.1], [0.0, 1.0, 0.0])
    assert np.allclose(prediction.gas_weights, [2 / 3, 1 / 3], atol=tol)
    assert prediction.fit.alpha == pytest.approx(np.log(2), abs=1e-10)
    assert np.allclose(prediction.canonical_weights, [2 / 3, 1 / 3], atol=1e-10)
    assert prediction.spectral_beta == pytest.approx(np.log(2), abs=1e-10)
    assert prediction.energy_distribution == pytest.approx({0: 0.0, 1: 0.9, 2: 0.1, 3: 0.0}, abs=tol)


def test_purity_average_is_bounded(canonical_composite, rng):
    gas, container = canonical_composite.gas, canonical_composite.container
    for _ in range(20):
        wa = rng.dirichlet(np.ones(2))
        wb = rng.dirichlet(np.ones(3))
        exact = hs_average_purity_exact(wa, wb, gas, container)
        assert min_purity(wa, gas) <= exact <= 1.0


def test_exact_average_converges_along_degeneracy_ladder(two_level_gas):
    weights = [0.15, 0.85]
    gaps = []
    for n in (5, 10, 20, 40, 80, 160):
        container = Spectrum.from_pairs([(0, n)])
        exact = hs_average_purity_exact(weights, [1.0], two_level_gas, container)
        approx = hs_average_purity_approx(weights, [1.0], two_level_gas, container)
        gaps.append(abs(exact - approx))
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.005


def test_canonical_matches_dominant_for_any_energy_distribution(rng):
    gas = Spectrum.from_pairs([(0, 1), (1, 2), (2, 3)])
    container = Spectrum.from_pairs([(b, 2**b) for b in range(7)])
    composite = build_composite(gas, container)
    canonical = canonical_distribution(gas, np.log(2))
    # shells 2..6 reach every gas level
    for _ in range(10):
        energy = TotalEnergyDistribution(dict(zip(range(2, 7), rng.dirichlet(np.ones(5)))))
        dominant = dominant_distribution(energy, composite)
        assert np.allclose(dominant.weights, canonical.weights, atol=1e-10)


def test_predict_uses_dominant_region_average(canonical_composite):
    gas, container = canonical_composite.gas, canonical_composite.container
    prediction = predict(canonical_composite, [0.9, 0.1], [0.0, 1.0, 0.0])
    expected = hs_average_purity_dominant(prediction.gas_weights, prediction.container_weights, gas, container)
    assert prediction.hs_average_purity_approx == pytest.approx(expected, abs=tol)
    assert expected == pytest.approx(
        min_purity(prediction.gas_weights, gas) + min_purity(prediction.container_weights, container), abs=tol
    )
    assert "equilibrium_W_c_1" in dict(prediction.rows())
