import numpy as np
import pytest
from scipy import linalg

from qtl.core.exceptions import PropagationError, ValidationError
from qtl.physics import dynamics
from qtl.physics.dynamics import (
    Propagator,
    Trajectory,
    assemble_hamiltonian,
    fit_inverse_size_scaling,
    propagate,
    relaxation_time,
    time_fluctuation,
)
from qtl.physics.interactions import HermitianOperator, microcanonical_interaction, random_hermitian
from qtl.physics.states import JointDistribution, PureState, product_state, sample_accessible_region
from qtl.physics.theory import equilibrium_state

tol = 1e-10


def basis_product(composite, gas_index, container_index):
    gas = np.zeros(composite.gas_dimension, dtype=complex)
    gas[gas_index] = 1.0
    container = np.zeros(composite.container_dimension, dtype=complex)
    container[container_index] = 1.0
    return product_state(gas, container, composite)


def test_assemble_hamiltonian_adds_local_energies(small_composite):
    zero = HermitianOperator(np.zeros((small_composite.dimension, small_composite.dimension)))
    hamiltonian = assemble_hamiltonian(small_composite, zero)
    assert np.allclose(hamiltonian.matrix, np.diag(small_composite.total_energies))


def test_assemble_hamiltonian_dimension_mismatch(small_composite):
    with pytest.raises(ValidationError):
        assemble_hamiltonian(small_composite, HermitianOperator(np.eye(4)))


def test_rabi_oscillation():
    coupling = 0.3
    hamiltonian = HermitianOperator(np.array([[0.0, coupling], [coupling, 0.0]]))
    times = np.linspace(0.0, 20.0, 101)
    states = Propagator(hamiltonian).evolve(PureState(np.array([1.0, 0.0])), times)
    assert np.allclose(np.abs(states[:, 0]) ** 2, np.cos(coupling * times) ** 2, atol=1e-12)


def test_zero_interaction_keeps_occupations(small_composite):
    zero = HermitianOperator(np.zeros((small_composite.dimension, small_composite.dimension)))
    psi0 = basis_product(small_composite, 1, 2)
    trajectory = propagate(
        assemble_hamiltonian(small_composite, zero), psi0, np.linspace(0.0, 10.0, 50), small_composite
    )
    assert np.allclose(trajectory.gas_occupations, trajectory.gas_occupations[0], atol=tol)
    assert np.allclose(trajectory.purity, 1.0, atol=tol)
    assert np.allclose(trajectory.entropy, 0.0, atol=1e-8)


def test_unitarity_and_energy_conservation(small_composite, rng):
    interaction = random_hermitian(small_composite.dimension, 0.1, rng)
    psi0 = basis_product(small_composite, 0, 0)
    trajectory = propagate(
        assemble_hamiltonian(small_composite, interaction), psi0, np.linspace(0.0, 100.0, 200), small_composite
    )
    assert np.max(np.abs(trajectory.norm - 1.0)) < tol
    assert np.max(np.abs(trajectory.energy - trajectory.energy[0])) < tol


def test_time_reversal(canonical_composite, rng):
    interaction = random_hermitian(canonical_composite.dimension, 0.0075, rng)
    propagator = Propagator(assemble_hamiltonian(canonical_composite, interaction))
    psi0 = sample_accessible_region(canonical_composite, JointDistribution.product([0.5, 0.5], [0.0, 1.0, 0.0]), rng)
    forward = propagator.evolve(psi0, [50.0])[0]
    back = propagator.evolve(forward, [-50.0])[0]
    assert np.max(np.abs(back - psi0.amplitudes)) < 1e-8


def test_microcanonical_conserves_joint_occupations(small_composite, rng):
    interaction = microcanonical_interaction(small_composite, 0.2, rng)
    psi0 = product_state(np.full(3, 1 / np.sqrt(3)), np.full(3, 1 / np.sqrt(3)), small_composite)
    trajectory = propagate(
        assemble_hamiltonian(small_composite, interaction), psi0, np.linspace(0.0, 80.0, 100), small_composite
    )
    assert np.max(np.abs(trajectory.joint_occupations - trajectory.joint_occupations[0])) < tol
    assert np.max(np.abs(trajectory.local_energy - trajectory.local_energy[0])) < tol


def test_distance_to_reference(small_composite):
    zero = HermitianOperator(np.zeros((small_composite.dimension, small_composite.dimension)))
    psi0 = basis_product(small_composite, 0, 0)
    reference = equilibrium_state([1.0, 0.0], small_composite.gas)
    trajectory = propagate(
        assemble_hamiltonian(small_composite, zero), psi0, [0.0, 1.0], small_composite, reference=reference
    )
    assert np.allclose(trajectory.distance, 0.0, atol=tol)


def test_trajectory_table_columns(small_composite):
    zero = HermitianOperator(np.zeros((small_composite.dimension, small_composite.dimension)))
    trajectory = propagate(
        assemble_hamiltonian(small_composite, zero),
        basis_product(small_composite, 0, 0),
        np.linspace(0.0, 1.0, 5),
        small_composite,
    )
    assert trajectory.columns == ["t", "W_g_0", "W_g_1", "P_g", "S_g", "d"]
    assert trajectory.table().shape == (5, 6)


def test_times_must_increase(small_composite):
    zero = HermitianOperator(np.zeros((small_composite.dimension, small_composite.dimension)))
    with pytest.raises(ValidationError):
        propagate(
            assemble_hamiltonian(small_composite, zero),
            basis_product(small_composite, 0, 0),
            [0.0, 2.0, 1.0],
            small_composite,
        )


def test_dimension_cap(small_composite):
    zero = HermitianOperator(np.zeros((small_composite.dimension, small_composite.dimension)))
    with pytest.raises(PropagationError) as info:
        Propagator(zero, max_dimension=4, scenario_id="capped")
    assert "capped" in str(info.value)


def test_eigensolver_falls_back_to_next_driver(monkeypatch):
    drivers = []
    original = linalg.eigh

    def flaky(matrix, driver=None, **kwargs):
        drivers.append(driver)
        if driver == "evr":
            raise linalg.LinAlgError("did not converge")
        return original(matrix, driver=driver, **kwargs)

    monkeypatch.setattr(dynamics.linalg, "eigh", flaky)
    propagator = Propagator(HermitianOperator(np.diag([1.0, 2.0])))
    assert drivers == ["evr", "evd"]
    assert np.allclose(propagator.eigenvalues, [1.0, 2.0])


def test_eigensolver_failure_is_a_propagation_error(monkeypatch):
    def broken(matrix, driver=None, **kwargs):
        raise linalg.LinAlgError("did not converge")

    monkeypatch.setattr(dynamics.linalg, "eigh", broken)
    with pytest.raises(PropagationError) as info:
        Propagator(HermitianOperator(np.eye(2)), scenario_id="broken")
    assert info.value.scenario_id == "broken"


def test_plateau_of_constant_series():
    times = np.linspace(0.0, 10.0, 41)
    ones = np.ones(41)
    trajectory = Trajectory(
        times=times,
        gas_occupations=ones[:, None],
        purity=ones,
        entropy=0 * ones,
        joint_occupations=ones[:, None, None],
        distance=0 * ones,
        energy=0 * ones,
        local_energy=0 * ones,
        norm=ones,
    )
    assert trajectory.window(0.25).sum() == 11
    assert trajectory.plateau(0.7 * ones) == pytest.approx(0.7, abs=tol)


def test_time_fluctuation_of_constant_is_zero():
    times = np.linspace(0.0, 100.0, 500)
    assert time_fluctuation(np.full(500, 0.3), times, 25.0, 100.0) == pytest.approx(0.0, abs=1e-15)


def test_time_fluctuation_of_sine():
    amplitude = 0.2
    times = np.linspace(0.0, 40 * np.pi, 20001)
    series = 0.5 + amplitude * np.sin(times)
    assert time_fluctuation(series, times, 0.0, 40 * np.pi) == pytest.approx(amplitude**2 / 2, rel=1e-4)


@pytest.mark.parametrize("t_start, t_end", [(50.0, 50.0), (99.5, 100.0)])
def test_time_fluctuation_empty_window(t_start, t_end):
    times = np.linspace(0.0, 100.0, 101)
    with pytest.raises(ValidationError):
        time_fluctuation(np.zeros(101), times, t_start, t_end)


def test_relaxation_time():
    times = np.linspace(0.0, 10.0, 11)
    series = np.array([1.0, 0.8, 0.6, 0.4, 0.31, 0.3, 0.29, 0.3, 0.3, 0.3, 0.3])
    assert relaxation_time(series, times, 0.3, 0.05) == pytest.approx(4.0)
    assert relaxation_time(np.full(11, 0.3), times, 0.3, 0.05) == 0.0
    assert relaxation_time(np.linspace(1.0, 0.0, 11), times, 0.3, 0.05) is None


def test_scaling_fit_recovers_inverse_square_root():
    sizes = np.array([8, 16, 32, 64, 128], dtype=float)
    deviations = np.sqrt(0.053 / sizes)
    fit = fit_inverse_size_scaling(sizes, deviations)
    assert fit.exponent == pytest.approx(0.5, abs=tol)
    assert fit.coefficient == pytest.approx(0.053, rel=1e-9)
    assert fit.fixed_coefficient == pytest.approx(0.053, rel=1e-9)
    assert fit.rms_residual < tol
    assert dict(fit.rows())["fixed_exponent"] == 0.5


@pytest.mark.parametrize(
    "sizes, deviations",
    [
        ([8, 16], [0.1, 0.07]),
        ([8, 8, 8], [0.1, 0.1, 0.1]),
        ([8, 16, 32], [0.1, 0.0, 0.05]),
        ([8, 16, 32], [0.1, 0.07]),
    ],
)
def test_scaling_fit_rejects_degenerate_input(sizes, deviations):
    with pytest.raises(ValidationError):
        fit_inverse_size_scaling(sizes, deviations)
