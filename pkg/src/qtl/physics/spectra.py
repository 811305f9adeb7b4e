"""
Subsystem spectra on an integer energy grid and the composite product basis.

Basis convention: the flat index of the product state |A,a> x |B,b> is
``gas_index * container_dimension + container_index``, where gas states are
enumerated level by level (degenerate states contiguous) and likewise for the
container. The container index therefore varies fastest, and an amplitude
vector reshaped to ``(gas_dimension, container_dimension)`` is the coefficient
matrix used by the partial traces.
"""

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from qtl.core.exceptions import EmptyShellError, ValidationError

logger = structlog.get_logger(__name__)


class EnergyLevel(BaseModel):
    """One level of a spectrum: grid energy and degeneracy."""

    model_config = ConfigDict(frozen=True)

    energy: int = Field(..., ge=0, description="Energy in units of the quantum")
    degeneracy: int = Field(..., ge=1, description="Number of states in the level")


class Spectrum(BaseModel):
    """
    A finite spectrum with degeneracies.

    All arithmetic uses the integer grid energies; ``quantum`` only scales
    energies where they enter exponentials or Hamiltonian matrices.
    """

    model_config = ConfigDict(frozen=True)

    levels: tuple[EnergyLevel, ...] = Field(..., min_length=1)
    quantum: float = Field(default=1.0, gt=0.0, description="Energy unit dE")

    @field_validator("levels")
    @classmethod
    def _strictly_ascending(cls, levels: tuple[EnergyLevel, ...]) -> tuple[EnergyLevel, ...]:
        energies = [level.energy for level in levels]
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise ValueError(f"level energies must be strictly ascending, got {energies}")
        return levels

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]], quantum: float = 1.0) -> "Spectrum":
        """Build a spectrum from ``[energy, degeneracy]`` pairs."""
        try:
            levels = tuple(EnergyLevel(energy=e, degeneracy=n) for e, n in pairs)
            return cls(levels=levels, quantum=quantum)
        except ValueError as e:
            raise ValidationError(f"Invalid spectrum: {e}", cause=e) from e

    @property
    def energies(self) -> np.ndarray:
        return np.array([level.energy for level in self.levels], dtype=np.int64)

    @property
    def degeneracies(self) -> np.ndarray:
        return np.array([level.degeneracy for level in self.levels], dtype=np.int64)

    @property
    def dimension(self) -> int:
        return int(self.degeneracies.sum())

    @property
    def offsets(self) -> np.ndarray:
        """Start index of every level in the local basis."""
        return np.concatenate(([0], np.cumsum(self.degeneracies)[:-1])).astype(np.int64)

    def level_of_state(self) -> np.ndarray:
        """Level index of every local basis state."""
        return np.repeat(np.arange(len(self.levels)), self.degeneracies)

    def state_energies(self) -> np.ndarray:
        """Grid energy of every local basis state."""
        return np.repeat(self.energies, self.degeneracies)

    def level_index(self, energy: int) -> int | None:
        """Index of the level at a grid energy, or None."""
        for i, level in enumerate(self.levels):
            if level.energy == energy:
                return i
        return None

    def degeneracy_at(self, energy: int) -> int:
        """Degeneracy at a grid energy (0 where there is no level)."""
        index = self.level_index(energy)
        return 0 if index is None else self.levels[index].degeneracy

    def __len__(self) -> int:
        return len(self.levels)


class CompositeSystem:
    """
    Gas x container product system with index map and energy shells.

    Immutable after construction.
    """

    def __init__(self, gas: Spectrum, container: Spectrum):
        if not np.isclose(gas.quantum, container.quantum, rtol=0.0, atol=1e-15):
            raise ValidationError(
                "Gas and container must share one energy quantum",
                details={"gas": gas.quantum, "container": container.quantum},
            )
        self.gas = gas
        self.container = container
        self.quantum = gas.quantum
        self.gas_dimension = gas.dimension
        self.container_dimension = container.dimension
        self.dimension = self.gas_dimension * self.container_dimension

        shells: dict[int, list[tuple[int, int]]] = {}
        for a_index, a_level in enumerate(gas.levels):
            for b_index, b_level in enumerate(container.levels):
                shells.setdefault(a_level.energy + b_level.energy, []).append((a_index, b_index))
        self.shells: dict[int, tuple[tuple[int, int], ...]] = {
            energy: tuple(pairs) for energy, pairs in sorted(shells.items())
        }

    @property
    def shell_energies(self) -> list[int]:
        return list(self.shells)

    @property
    def level_shape(self) -> tuple[int, int]:
        """Shape of the (gas level, container level) joint distribution."""
        return len(self.gas), len(self.container)

    def index_of(self, gas_level: int, a: int, container_level: int, b: int) -> int:
        """Flat index of |A,a> x |B,b>."""
        if not 0 <= a < self.gas.levels[gas_level].degeneracy:
            raise ValidationError(f"gas sub-index {a} out of range for level {gas_level}")
        if not 0 <= b < self.container.levels[container_level].degeneracy:
            raise ValidationError(f"container sub-index {b} out of range for level {container_level}")
        gas_index = int(self.gas.offsets[gas_level]) + a
        container_index = int(self.container.offsets[container_level]) + b
        return gas_index * self.container_dimension + container_index

    def tuple_of(self, index: int) -> tuple[int, int, int, int]:
        """Inverse of :meth:`index_of`: flat index to (A, a, B, b)."""
        if not 0 <= index < self.dimension:
            raise ValidationError(f"flat index {index} out of range [0, {self.dimension})")
        gas_index, container_index = divmod(int(index), self.container_dimension)
        gas_level = int(self._gas_levels[gas_index])
        container_level = int(self._container_levels[container_index])
        return (
            gas_level,
            gas_index - int(self.gas.offsets[gas_level]),
            container_level,
            container_index - int(self.container.offsets[container_level]),
        )

    @cached_property
    def _gas_levels(self) -> np.ndarray:
        return self.gas.level_of_state()

    @cached_property
    def _container_levels(self) -> np.ndarray:
        return self.container.level_of_state()

    def gas_slice(self, gas_level: int) -> slice:
        start = int(self.gas.offsets[gas_level])
        return slice(start, start + self.gas.levels[gas_level].degeneracy)

    def container_slice(self, container_level: int) -> slice:
        start = int(self.container.offsets[container_level])
        return slice(start, start + self.container.levels[container_level].degeneracy)

    def block_indices(self, gas_level: int, container_level: int) -> np.ndarray:
        """Flat indices spanning the (A, B) block, in row-major (a, b) order."""
        g = np.arange(self.gas_dimension)[self.gas_slice(gas_level)]
        c = np.arange(self.container_dimension)[self.container_slice(container_level)]
        return (g[:, None] * self.container_dimension + c[None, :]).ravel()

    def block_dimension(self, gas_level: int, container_level: int) -> int:
        return self.gas.levels[gas_level].degeneracy * self.container.levels[container_level].degeneracy

    def shell_degeneracy(self, energy: int) -> int:
        """N(E): number of product states in the energy shell E."""
        pairs = self.shells.get(int(energy))
        if not pairs:
            raise EmptyShellError(int(energy))
        return sum(self.block_dimension(a, b) for a, b in pairs)

    @cached_property
    def total_energies(self) -> np.ndarray:
        """Grid energy E_A + E_B of every flat basis state."""
        return (
            self.gas.state_energies()[:, None] + self.container.state_energies()[None, :]
        ).ravel()

    def gas_hamiltonian(self) -> np.ndarray:
        """H^g lifted to the full space (diagonal, energies times the quantum)."""
        energies = np.repeat(self.gas.state_energies(), self.container_dimension)
        return np.diag(energies * self.quantum).astype(np.complex128)

    def container_hamiltonian(self) -> np.ndarray:
        """H^c lifted to the full space."""
        energies = np.tile(self.container.state_energies(), self.gas_dimension)
        return np.diag(energies * self.quantum).astype(np.complex128)

    def gas_projector(self, gas_level: int) -> np.ndarray:
        """Projector onto gas level A, lifted to the full space."""
        mask = np.repeat(self._gas_levels == gas_level, self.container_dimension)
        return np.diag(mask.astype(np.complex128))

    def container_projector(self, container_level: int) -> np.ndarray:
        """Projector onto container level B, lifted to the full space."""
        mask = np.tile(self._container_levels == container_level, self.gas_dimension)
        return np.diag(mask.astype(np.complex128))

    def __repr__(self) -> str:
        return (
            f"<CompositeSystem gas={self.gas_dimension} container={self.container_dimension} "
            f"shells={self.shell_energies}>"
        )


def build_composite(gas: Spectrum, container: Spectrum) -> CompositeSystem:
    """
    Compose two spectra into the product system.

    Args:
        gas: Spectrum of the observed subsystem
        container: Spectrum of its environment

    Returns:
        CompositeSystem with index map and shell decomposition
    """
    composite = CompositeSystem(gas, container)
    logger.debug(
        "Composite built",
        dimension=composite.dimension,
        shells=len(composite.shells),
    )
    return composite


def shell_degeneracy(composite: CompositeSystem, energy: int) -> int:
    """N(E) = sum over (A, B) in shell E of N_A * N_B."""
    return composite.shell_degeneracy(energy)
