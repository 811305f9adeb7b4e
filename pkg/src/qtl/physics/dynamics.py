"""
Exact Schrodinger propagation and trajectory statistics.

The Hamiltonian is diagonalized once; psi(t) = U exp(-i Lambda t) U^dagger psi0
for every requested time, with hbar = 1.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import structlog
from scipy import linalg
from scipy.integrate import trapezoid
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from qtl.core.exceptions import PropagationError, ValidationError
from qtl.physics.interactions import HermitianOperator
from qtl.physics.spectra import CompositeSystem
from qtl.physics.states import (
    DensityOperator,
    PureState,
    entropy_from_eigenvalues,
    block_weights,
    reduced_gas_matrices,
)

logger = structlog.get_logger(__name__)

NORM_DRIFT_TOLERANCE = 1e-10
MIN_WINDOW_SAMPLES = 10
DEFAULT_MAX_DIMENSION = 4096

# LAPACK drivers tried in order when one fails to converge.
EIGH_DRIVERS = ("evr", "evd", "ev")


def assemble_hamiltonian(composite: CompositeSystem, interaction: HermitianOperator) -> HermitianOperator:
    """H = H^g + H^c + I with the diagonal part in units of the quantum."""
    if interaction.dimension != composite.dimension:
        raise ValidationError(
            "Interaction dimension does not match composite",
            details={"interaction": interaction.dimension, "composite": composite.dimension},
        )
    matrix = np.array(interaction.matrix, dtype=np.complex128)
    matrix[np.diag_indices_from(matrix)] += composite.total_energies * composite.quantum
    return HermitianOperator(matrix)


def eigh_with_fallback(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition, retrying with the next LAPACK driver on failure."""
    for attempt in Retrying(
        retry=retry_if_exception_type(linalg.LinAlgError),
        stop=stop_after_attempt(len(EIGH_DRIVERS)),
        reraise=True,
    ):
        with attempt:
            driver = EIGH_DRIVERS[attempt.retry_state.attempt_number - 1]
            if attempt.retry_state.attempt_number > 1:
                logger.warning("Retrying eigendecomposition", driver=driver)
            return linalg.eigh(matrix, driver=driver, check_finite=True)
    raise AssertionError("unreachable")


class Propagator:
    """
    Time evolution under a fixed Hamiltonian.

    Holds the eigendecomposition so any number of initial states can be
    evolved to arbitrary (also negative) times.
    """

    def __init__(
        self,
        hamiltonian: HermitianOperator,
        max_dimension: int = DEFAULT_MAX_DIMENSION,
        scenario_id: Optional[str] = None,
    ):
        if hamiltonian.dimension > max_dimension:
            raise PropagationError(
                f"Dimension {hamiltonian.dimension} exceeds the propagation cap {max_dimension}",
                scenario_id=scenario_id,
            )
        started = time.perf_counter()
        try:
            self.eigenvalues, self.eigenvectors = eigh_with_fallback(hamiltonian.matrix)
        except (linalg.LinAlgError, ValueError) as e:
            raise PropagationError(
                f"Eigendecomposition failed: {e}", scenario_id=scenario_id, cause=e
            ) from e
        self.hamiltonian = hamiltonian
        self.dimension = hamiltonian.dimension
        self.scenario_id = scenario_id
        logger.debug(
            "Hamiltonian diagonalized",
            dimension=self.dimension,
            seconds=round(time.perf_counter() - started, 3),
        )

    def evolve(self, psi0: PureState | np.ndarray, times: Sequence[float]) -> np.ndarray:
        """Amplitudes psi(t) for every time, shape (len(times), dimension)."""
        amplitudes = psi0.amplitudes if isinstance(psi0, PureState) else np.asarray(psi0, dtype=np.complex128)
        if amplitudes.shape != (self.dimension,):
            raise ValidationError(
                "Initial state dimension does not match Hamiltonian",
                details={"state": amplitudes.shape, "hamiltonian": self.dimension},
            )
        times = np.asarray(times, dtype=np.float64)
        coefficients = self.eigenvectors.conj().T @ amplitudes
        phases = np.exp(-1j * np.outer(times, self.eigenvalues))
        return (phases * coefficients[None, :]) @ self.eigenvectors.T

    def expectation(self, states: np.ndarray, operator: np.ndarray) -> np.ndarray:
        """<psi|O|psi> for every row of ``states``."""
        return np.sum(states.conj() * (states @ operator.T), axis=1).real


@dataclass
class Trajectory:
    """Local observables along one propagation run."""

    times: np.ndarray
    gas_occupations: np.ndarray
    purity: np.ndarray
    entropy: np.ndarray
    joint_occupations: np.ndarray
    distance: np.ndarray
    energy: np.ndarray
    local_energy: np.ndarray
    norm: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if np.any(np.diff(self.times) <= 0.0):
            raise ValidationError("Trajectory times must be strictly increasing")

    @property
    def columns(self) -> list[str]:
        n_levels = self.gas_occupations.shape[1]
        return ["t"] + [f"W_g_{i}" for i in range(n_levels)] + ["P_g", "S_g", "d"]

    def table(self) -> np.ndarray:
        """Rows matching :attr:`columns`."""
        return np.column_stack([
            self.times,
            self.gas_occupations,
            self.purity,
            self.entropy,
            self.distance,
        ])

    def window(self, fraction: float = 0.25) -> np.ndarray:
        """Mask of samples in the final ``fraction`` of the run."""
        t_end = self.times[-1]
        t_start = t_end - fraction * (t_end - self.times[0])
        return self.times >= t_start

    def plateau(self, series: np.ndarray, fraction: float = 0.25) -> float:
        """Trapezoidal time average over the final ``fraction`` of the run."""
        mask = self.window(fraction)
        t = self.times[mask]
        if t.size < 2:
            return float(series[mask].mean())
        return float(trapezoid(series[mask], t) / (t[-1] - t[0]))


def propagate(
    hamiltonian: HermitianOperator | Propagator,
    psi0: PureState,
    times: Sequence[float],
    composite: CompositeSystem,
    reference: Optional[DensityOperator] = None,
    metadata: Optional[dict[str, Any]] = None,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> Trajectory:
    """
    Propagate ``psi0`` exactly and record the local observables.

    Args:
        hamiltonian: Full Hamiltonian, or a prepared Propagator
        psi0: Normalized initial state
        times: Strictly increasing sample times (units hbar/dE)
        composite: Product structure used for the reduced observables
        reference: Equilibrium gas state for the distance column
        metadata: Seed, interaction strength, scenario id, ...
        max_dimension: Propagation cap

    Returns:
        Trajectory of gas occupations, purity, entropy, joint occupations,
        distance to ``reference``, energies and norm
    """
    metadata = dict(metadata or {})
    scenario_id = metadata.get("scenario_id")
    if isinstance(hamiltonian, Propagator):
        propagator = hamiltonian
    else:
        propagator = Propagator(hamiltonian, max_dimension=max_dimension, scenario_id=scenario_id)
    if propagator.dimension != composite.dimension:
        raise ValidationError("Hamiltonian dimension does not match composite")

    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("At least one sample time is required")
    states = propagator.evolve(psi0, times)

    probabilities = np.abs(states) ** 2
    norm = probabilities.sum(axis=1)
    drift = float(np.max(np.abs(norm - 1.0)))
    if drift > NORM_DRIFT_TOLERANCE:
        raise PropagationError(f"Norm drift {drift:.3e} exceeds tolerance", scenario_id=scenario_id)

    joint = block_weights(probabilities, composite)
    rho = reduced_gas_matrices(states, composite)
    purity = np.sum(np.abs(rho) ** 2, axis=(1, 2))
    entropy = entropy_from_eigenvalues(np.linalg.eigvalsh(rho))
    if reference is None:
        distance = np.zeros(times.size)
    else:
        diff = rho - reference.matrix[None, :, :]
        distance = np.sum(np.abs(diff) ** 2, axis=(1, 2))

    local_h = composite.total_energies * composite.quantum
    local_energy = probabilities @ local_h
    energy = propagator.expectation(states, propagator.hamiltonian.matrix)

    return Trajectory(
        times=times,
        gas_occupations=joint.sum(axis=2),
        purity=purity,
        entropy=entropy,
        joint_occupations=joint,
        distance=distance,
        energy=energy,
        local_energy=local_energy,
        norm=norm,
        metadata=metadata,
    )


def time_fluctuation(
    series: Sequence[float],
    times: Sequence[float],
    t_start: float,
    t_end: float,
) -> float:
    """
    Temporal variance of ``series`` on [t_start, t_end].

    Time average of the square minus square of the time average, both by
    trapezoidal quadrature on the sample grid.
    """
    series = np.asarray(series, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if series.shape != times.shape:
        raise ValidationError("Series and times must have the same length")
    if not t_start < t_end:
        raise ValidationError(f"Empty window [{t_start}, {t_end}]")
    mask = (times >= t_start) & (times <= t_end)
    if int(mask.sum()) < MIN_WINDOW_SAMPLES:
        raise ValidationError(
            "Empty window: too few samples",
            details={"samples": int(mask.sum()), "required": MIN_WINDOW_SAMPLES},
        )
    t = times[mask]
    x = series[mask]
    span = t[-1] - t[0]
    mean = trapezoid(x, t) / span
    mean_sq = trapezoid(x * x, t) / span
    return float(max(mean_sq - mean * mean, 0.0))


def relaxation_time(
    series: Sequence[float],
    times: Sequence[float],
    target: float,
    tolerance: float,
) -> Optional[float]:
    """First time after which ``series`` stays within ``tolerance`` of ``target``."""
    series = np.asarray(series, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    outside = np.flatnonzero(np.abs(series - target) > tolerance)
    if outside.size == 0:
        return float(times[0])
    last = int(outside[-1])
    if last + 1 >= times.size:
        return None
    return float(times[last + 1])


@dataclass(frozen=True)
class ScalingFit:
    """Fit of Delta = sqrt(c / N^(2p)), free and with p = 1/2."""

    coefficient: float
    exponent: float
    rms_residual: float
    fixed_coefficient: float
    fixed_rms_residual: float

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("coefficient", self.coefficient),
            ("exponent", self.exponent),
            ("rms_residual", self.rms_residual),
            ("fixed_exponent", 0.5),
            ("fixed_coefficient", self.fixed_coefficient),
            ("fixed_rms_residual", self.fixed_rms_residual),
        ]


def fit_inverse_size_scaling(sizes: Sequence[float], deviations: Sequence[float]) -> ScalingFit:
    """
    Least squares on ln Delta = 1/2 ln c - p ln N.

    Also reports the constrained fit with p fixed at 1/2.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    deviations = np.asarray(deviations, dtype=np.float64)
    if sizes.shape != deviations.shape or sizes.ndim != 1:
        raise ValidationError("Sizes and deviations must be 1-D and of equal length")
    if sizes.size < 3:
        raise ValidationError(f"Scaling fit needs at least 3 points, got {sizes.size}")
    if np.any(sizes <= 0.0) or np.any(deviations <= 0.0):
        raise ValidationError("Scaling fit needs positive sizes and deviations")
    if np.unique(sizes).size < 2:
        raise ValidationError("Scaling fit is degenerate: all sizes are identical")

    x = np.log(sizes)
    y = np.log(deviations)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)

    fixed_intercept = float(np.mean(y + 0.5 * x))
    fixed_residual = y - (fixed_intercept - 0.5 * x)

    return ScalingFit(
        coefficient=float(np.exp(2.0 * intercept)),
        exponent=float(-slope),
        rms_residual=float(np.sqrt(np.mean(residual**2))),
        fixed_coefficient=float(np.exp(2.0 * fixed_intercept)),
        fixed_rms_residual=float(np.sqrt(np.mean(fixed_residual**2))),
    )
