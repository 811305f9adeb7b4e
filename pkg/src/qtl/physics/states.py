"""
Pure states, reduced density operators and local observables.

Also hosts the uniform sampler over the accessible region: a product of
independent Haar-uniform unit vectors, one per (A, B) block, each scaled by
the square root of its fixed block weight.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import structlog
from scipy.special import xlogy

from qtl.core.exceptions import StorageError, ValidationError
from qtl.physics.spectra import CompositeSystem, Spectrum

logger = structlog.get_logger(__name__)

NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-10
EIGENVALUE_TOLERANCE = 1e-10
ENTROPY_FLOOR = 1e-14


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over the product basis."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise ValidationError(
                "State is not normalized",
                details={"norm_squared": norm_sq},
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    def matrix(self, composite: CompositeSystem) -> np.ndarray:
        """Coefficient matrix psi[gas_index, container_index]."""
        _check_dimension(self, composite)
        return self.amplitudes.reshape(composite.gas_dimension, composite.container_dimension)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, trace-one matrix."""

    matrix: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"Density operator must be square, got shape {matrix.shape}")
        if self.validate:
            if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > HERMITIAN_TOLERANCE:
                raise ValidationError("Density operator is not Hermitian")
            trace = complex(np.trace(matrix))
            if abs(trace - 1.0) > TRACE_TOLERANCE:
                raise ValidationError("Density operator trace is not one", details={"trace": trace})
            if np.linalg.eigvalsh(matrix).min() < -EIGENVALUE_TOLERANCE:
                raise ValidationError("Density operator has negative eigenvalues")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def diagonal(cls, weights: Sequence[float]) -> "DensityOperator":
        return cls(np.diag(np.asarray(weights, dtype=np.float64)).astype(np.complex128))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class JointDistribution:
    """Block weights W_AB over (gas level, container level)."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2:
            raise ValidationError(f"Joint distribution must be 2-D, got shape {weights.shape}")
        if np.any(weights < 0.0):
            raise ValidationError("Joint distribution has negative weights")
        total = float(weights.sum())
        if abs(total - 1.0) > NORM_TOLERANCE:
            raise ValidationError("Joint distribution is not normalized", details={"sum": total})
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def product(cls, gas_weights: Sequence[float], container_weights: Sequence[float]) -> "JointDistribution":
        """W_AB = W_A * W_B, the joint distribution of a product initial state."""
        return cls(np.outer(gas_weights, container_weights))

    @property
    def gas_marginal(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    @property
    def container_marginal(self) -> np.ndarray:
        return self.weights.sum(axis=0)


def _check_dimension(state: PureState, composite: CompositeSystem) -> None:
    if state.dimension != composite.dimension:
        raise ValidationError(
            "State dimension does not match composite",
            details={"state": state.dimension, "composite": composite.dimension},
        )


def partial_trace_gas(state: PureState, composite: CompositeSystem) -> DensityOperator:
    """rho^g = Tr_c |psi><psi|."""
    psi = state.matrix(composite)
    rho = psi @ psi.conj().T
    return DensityOperator(0.5 * (rho + rho.conj().T))


def partial_trace_container(state: PureState, composite: CompositeSystem) -> DensityOperator:
    """rho^c = Tr_g |psi><psi|."""
    psi = state.matrix(composite)
    rho = psi.T @ psi.conj()
    return DensityOperator(0.5 * (rho + rho.conj().T))


def purity(rho: DensityOperator) -> float:
    """P = tr(rho^2)."""
    return float(np.vdot(rho.matrix, rho.matrix).real)


def entropy_from_eigenvalues(eigenvalues: np.ndarray) -> np.ndarray:
    p = np.where(eigenvalues > ENTROPY_FLOOR, eigenvalues, 0.0)
    return np.maximum(-xlogy(p, p).sum(axis=-1), 0.0)


def von_neumann_entropy(rho: DensityOperator) -> float:
    """S = -tr(rho ln rho) in units of k_B."""
    return float(entropy_from_eigenvalues(np.linalg.eigvalsh(rho.matrix)))


def state_distance(rho1: DensityOperator, rho2: DensityOperator) -> float:
    """tr[(rho1 - rho2)^2]."""
    if rho1.dimension != rho2.dimension:
        raise ValidationError(
            "Density operators have different dimensions",
            details={"first": rho1.dimension, "second": rho2.dimension},
        )
    diff = rho1.matrix - rho2.matrix
    return float(np.vdot(diff, diff).real)


def block_weights(probabilities: np.ndarray, composite: CompositeSystem) -> np.ndarray:
    """
    Sum |psi|^2 over every (A, B) block.

    Accepts a single probability vector or a stack of shape (..., dim).
    """
    probs = probabilities.reshape(
        probabilities.shape[:-1] + (composite.gas_dimension, composite.container_dimension)
    )
    by_gas = np.add.reduceat(probs, composite.gas.offsets, axis=-2)
    return np.add.reduceat(by_gas, composite.container.offsets, axis=-1)


def occupations(state: PureState, composite: CompositeSystem) -> JointDistribution:
    """W_AB = sum_{a,b} |psi^{AB}_{ab}|^2."""
    _check_dimension(state, composite)
    weights = block_weights(np.abs(state.amplitudes) ** 2, composite)
    return JointDistribution(weights / weights.sum())


def haar_vector(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform unit vector from normalized complex Gaussians."""
    z = rng.standard_normal(dimension) + 1j * rng.standard_normal(dimension)
    return z / np.linalg.norm(z)


def _as_target(composite: CompositeSystem, target: JointDistribution | np.ndarray) -> JointDistribution:
    if not isinstance(target, JointDistribution):
        target = JointDistribution(np.asarray(target, dtype=np.float64))
    if target.weights.shape != composite.level_shape:
        raise ValidationError(
            "Target distribution shape does not match composite levels",
            details={"target": target.weights.shape, "levels": composite.level_shape},
        )
    return target


def sample_accessible_region(
    composite: CompositeSystem,
    target: JointDistribution | np.ndarray,
    rng: np.random.Generator,
) -> PureState:
    """
    Draw one state uniformly from the accessible region of ``target``.

    Each occupied (A, B) block receives an independent Haar vector scaled by
    sqrt(W_AB), so the occupations equal the target by construction.
    """
    target = _as_target(composite, target)
    psi = np.zeros((composite.gas_dimension, composite.container_dimension), dtype=np.complex128)
    for (a, b), weight in np.ndenumerate(target.weights):
        if weight <= 0.0:
            continue
        block = haar_vector(composite.block_dimension(a, b), rng)
        psi[composite.gas_slice(a), composite.container_slice(b)] = np.sqrt(weight) * block.reshape(
            composite.gas.levels[a].degeneracy, composite.container.levels[b].degeneracy
        )
    return PureState(psi.ravel())


def sample_accessible_region_batch(
    composite: CompositeSystem,
    target: JointDistribution | np.ndarray,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """Vectorized sampler: returns amplitudes of shape (size, dimension)."""
    if size < 1:
        raise ValidationError(f"Batch size must be positive, got {size}")
    target = _as_target(composite, target)
    psi = np.zeros(
        (size, composite.gas_dimension, composite.container_dimension), dtype=np.complex128
    )
    for (a, b), weight in np.ndenumerate(target.weights):
        if weight <= 0.0:
            continue
        shape = (size, composite.gas.levels[a].degeneracy, composite.container.levels[b].degeneracy)
        z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        norms = np.sqrt(np.sum(np.abs(z) ** 2, axis=(1, 2), keepdims=True))
        psi[:, composite.gas_slice(a), composite.container_slice(b)] = np.sqrt(weight) * z / norms
    return psi.reshape(size, composite.dimension)


def _normalized_local(vector: Sequence[complex], dimension: int, label: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.complex128).ravel()
    if vector.shape[0] != dimension:
        raise ValidationError(
            f"{label} amplitudes have wrong dimension",
            details={"expected": dimension, "got": vector.shape[0]},
        )
    norm_sq = float(np.vdot(vector, vector).real)
    if abs(norm_sq - 1.0) > NORM_TOLERANCE:
        raise ValidationError(f"{label} amplitudes are not normalized", details={"norm_squared": norm_sq})
    return vector


def product_state(
    gas_amplitudes: Sequence[complex],
    container_amplitudes: Sequence[complex],
    composite: CompositeSystem,
) -> PureState:
    """|g> x |c> in the composite basis."""
    gas = _normalized_local(gas_amplitudes, composite.gas_dimension, "Gas")
    container = _normalized_local(container_amplitudes, composite.container_dimension, "Container")
    amplitudes = np.kron(gas, container)
    return PureState(amplitudes / np.linalg.norm(amplitudes))


def local_vector(
    spectrum: Spectrum,
    weights: Sequence[float],
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Random local vector with fixed level weights.

    Haar-uniform inside each degenerate level, scaled by sqrt(W_A). A level of
    degeneracy one gets a random phase. Without an RNG the amplitude is spread
    evenly with zero phase.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(spectrum),):
        raise ValidationError(
            "Level weights do not match spectrum",
            details={"levels": len(spectrum), "weights": weights.shape[0] if weights.ndim else 0},
        )
    if np.any(weights < 0.0) or abs(float(weights.sum()) - 1.0) > NORM_TOLERANCE:
        raise ValidationError("Level weights must be non-negative and sum to one")

    vector = np.zeros(spectrum.dimension, dtype=np.complex128)
    for index, (level, weight) in enumerate(zip(spectrum.levels, weights)):
        if weight <= 0.0:
            continue
        start = int(spectrum.offsets[index])
        if rng is None:
            block = np.full(level.degeneracy, 1.0 / np.sqrt(level.degeneracy), dtype=np.complex128)
        else:
            block = haar_vector(level.degeneracy, rng)
        vector[start : start + level.degeneracy] = np.sqrt(weight) * block
    return vector / np.linalg.norm(vector)


def reduced_gas_matrices(amplitudes: np.ndarray, composite: CompositeSystem) -> np.ndarray:
    """Gas-reduced density matrices for a stack of amplitude vectors (n, dim)."""
    psi = amplitudes.reshape(-1, composite.gas_dimension, composite.container_dimension)
    return psi @ psi.conj().transpose(0, 2, 1)


def gas_purities(amplitudes: np.ndarray, composite: CompositeSystem) -> np.ndarray:
    """Purity of the gas-reduced state for each row of ``amplitudes``."""
    rho = reduced_gas_matrices(amplitudes, composite)
    return np.sum(np.abs(rho) ** 2, axis=(1, 2))


def gas_entropies(amplitudes: np.ndarray, composite: CompositeSystem) -> np.ndarray:
    """Von Neumann entropy of the gas-reduced state for each row of ``amplitudes``."""
    rho = reduced_gas_matrices(amplitudes, composite)
    return entropy_from_eigenvalues(np.linalg.eigvalsh(rho))


def save_state(state: PureState, path: str | Path) -> Path:
    """Dump amplitudes as CSV with columns index, re, im."""
    path = Path(path)
    table = np.column_stack([
        np.arange(state.dimension),
        state.amplitudes.real,
        state.amplitudes.imag,
    ])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(
            path, table, delimiter=",", header="index,re,im", comments="",
            fmt=["%d", "%.17g", "%.17g"],
        )
    except OSError as e:
        raise StorageError(f"Could not write state: {e}", path=str(path), operation="save_state", cause=e) from e
    return path


def load_state(path: str | Path) -> PureState:
    """Read a state written by :func:`save_state`."""
    path = Path(path)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise StorageError(f"Could not read state: {e}", path=str(path), operation="load_state", cause=e) from e
    order = np.argsort(table[:, 0])
    table = table[order]
    if not np.array_equal(table[:, 0], np.arange(table.shape[0])):
        raise StorageError("State CSV indices are not contiguous", path=str(path), operation="load_state")
    return PureState(table[:, 1] + 1j * table[:, 2])
