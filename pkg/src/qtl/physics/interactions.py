"""
Random interaction operators and the weak-coupling diagnostics.

Matrix elements carry i.i.d. Gaussian real and imaginary parts of standard
deviation ``delta`` (diagonal included) before Hermitization; the Hermitian
part (G + G^dagger) / 2 therefore has off-diagonal real and imaginary parts
of standard deviation delta / sqrt(2).
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import structlog

from qtl.core.exceptions import StorageError, ValidationError
from qtl.physics.spectra import CompositeSystem
from qtl.physics.states import PureState

logger = structlog.get_logger(__name__)

HERMITIAN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class HermitianOperator:
    """A complex square matrix equal to its conjugate transpose."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"Operator must be square, got shape {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > HERMITIAN_TOLERANCE:
            raise ValidationError("Operator is not Hermitian")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + other.matrix)


@dataclass(frozen=True)
class CouplingDiagnostics:
    """Interaction strength and local energies of one state."""

    i_rms: float
    gas_energy: float
    container_energy: float

    @property
    def ratio(self) -> float:
        """i_rms relative to the local energy scale (1 when both energies vanish)."""
        scale = abs(self.gas_energy) + abs(self.container_energy)
        return self.i_rms / scale if scale > 0.0 else self.i_rms


def random_hermitian(dimension: int, delta: float, rng: np.random.Generator) -> HermitianOperator:
    """
    Gaussian random Hermitian matrix.

    Args:
        dimension: Matrix size (>= 1)
        delta: Standard deviation of real and imaginary parts before Hermitization
        rng: Generator supplying the draws

    Returns:
        (G + G^dagger) / 2
    """
    if dimension < 1:
        raise ValidationError(f"Dimension must be positive, got {dimension}")
    if delta < 0.0:
        raise ValidationError(f"Interaction strength must be non-negative, got {delta}")
    g = rng.normal(0.0, delta, (dimension, dimension)) + 1j * rng.normal(
        0.0, delta, (dimension, dimension)
    )
    return HermitianOperator(0.5 * (g + g.conj().T))


def microcanonical_interaction(
    composite: CompositeSystem,
    delta: float,
    rng: np.random.Generator,
) -> HermitianOperator:
    """
    Block-diagonal coupling in the (A, B) decomposition.

    Every block gets an independent random Hermitian matrix; all entries
    between different blocks are exactly zero, so the operator commutes with
    every gas and container level projector.
    """
    matrix = np.zeros((composite.dimension, composite.dimension), dtype=np.complex128)
    gas_levels, container_levels = composite.level_shape
    for a in range(gas_levels):
        for b in range(container_levels):
            indices = composite.block_indices(a, b)
            block = random_hermitian(indices.size, delta, rng)
            matrix[np.ix_(indices, indices)] = block.matrix
    return HermitianOperator(matrix)


def shell_interaction(
    composite: CompositeSystem,
    delta: float,
    rng: np.random.Generator,
) -> HermitianOperator:
    """Random coupling restricted to pairs of basis states with equal total energy."""
    full = random_hermitian(composite.dimension, delta, rng).matrix
    energies = composite.total_energies
    mask = energies[:, None] == energies[None, :]
    return HermitianOperator(np.where(mask, full, 0.0))


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """max |[a, b]_ij|."""
    commutator = a @ b - b @ a
    return float(np.max(np.abs(commutator), initial=0.0))


def _matrix(operator: HermitianOperator | np.ndarray) -> np.ndarray:
    return operator.matrix if isinstance(operator, HermitianOperator) else np.asarray(operator)


def coupling_diagnostics(
    state: PureState,
    interaction: HermitianOperator | np.ndarray,
    gas_hamiltonian: HermitianOperator | np.ndarray,
    container_hamiltonian: HermitianOperator | np.ndarray,
) -> CouplingDiagnostics:
    """
    Evaluate sqrt(<I^2>), <H^g> and <H^c> for one state.

    Whether the interaction is weak is left to the caller.
    """
    psi = state.amplitudes
    operators = {
        "interaction": _matrix(interaction),
        "gas_hamiltonian": _matrix(gas_hamiltonian),
        "container_hamiltonian": _matrix(container_hamiltonian),
    }
    for name, operator in operators.items():
        if operator.shape != (psi.shape[0], psi.shape[0]):
            raise ValidationError(
                f"{name} dimension does not match state",
                details={"operator": operator.shape, "state": psi.shape[0]},
            )

    i_psi = operators["interaction"] @ psi
    return CouplingDiagnostics(
        i_rms=float(np.linalg.norm(i_psi)),
        gas_energy=float(np.vdot(psi, operators["gas_hamiltonian"] @ psi).real),
        container_energy=float(np.vdot(psi, operators["container_hamiltonian"] @ psi).real),
    )


def save_operator(operator: HermitianOperator, path: str | Path) -> Path:
    """Write an operator as .npy (binary) or .csv (columns row, col, re, im)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix == ".npy":
            np.save(path, operator.matrix)
        else:
            rows, cols = np.indices(operator.matrix.shape)
            table = np.column_stack([
                rows.ravel(),
                cols.ravel(),
                operator.matrix.real.ravel(),
                operator.matrix.imag.ravel(),
            ])
            np.savetxt(
                path, table, delimiter=",", header="row,col,re,im", comments="",
                fmt=["%d", "%d", "%.17g", "%.17g"],
            )
    except OSError as e:
        raise StorageError(
            f"Could not write operator: {e}", path=str(path), operation="save_operator", cause=e
        ) from e
    logger.debug("Operator saved", path=str(path), dimension=operator.dimension)
    return path


def load_operator(path: str | Path) -> HermitianOperator:
    """Read an operator written by :func:`save_operator`."""
    path = Path(path)
    try:
        if path.suffix == ".npy":
            return HermitianOperator(np.load(path))
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as e:
        raise StorageError(
            f"Could not read operator: {e}", path=str(path), operation="load_operator", cause=e
        ) from e
    dimension = int(round(np.sqrt(table.shape[0])))
    if dimension * dimension != table.shape[0]:
        raise StorageError("Operator CSV is not a square matrix", path=str(path), operation="load_operator")
    matrix = np.zeros((dimension, dimension), dtype=np.complex128)
    matrix[table[:, 0].astype(int), table[:, 1].astype(int)] = table[:, 2] + 1j * table[:, 3]
    return HermitianOperator(matrix)
