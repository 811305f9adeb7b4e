"""
Scenario schemas for qtl.
Every experiment is driven by one ScenarioConfig, loaded from JSON (or
replayed from the config header of a result CSV).
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from qtl.core.exceptions import ConfigurationError, QtlError, StorageError
from qtl.physics.spectra import CompositeSystem, Spectrum, build_composite

WEIGHT_TOLERANCE = 1e-9
CONFIG_HEADER = "# config: "


class ExperimentKind(str, Enum):
    """Supported experiment kinds."""

    PREDICT = "predict"
    HISTOGRAM = "histogram"
    EVOLVE = "evolve"
    FLUCTUATION_SWEEP = "fluctuation-sweep"


class InteractionKind(str, Enum):
    """Random interaction generators."""

    FULL = "full"
    MICROCANONICAL = "microcanonical"
    SHELL = "shell"


class SpectrumConfig(BaseModel):
    """A spectrum as a list of [energy, degeneracy] pairs."""

    model_config = ConfigDict(extra="forbid")

    levels: list[tuple[int, int]] = Field(..., min_length=1, description="[energy, degeneracy] pairs")
    quantum: float = Field(default=1.0, gt=0.0, description="Energy unit dE")

    @field_validator("levels")
    @classmethod
    def _valid_spectrum(cls, levels: list[tuple[int, int]]) -> list[tuple[int, int]]:
        try:
            Spectrum.from_pairs(levels)
        except QtlError as e:
            raise ValueError(e.message) from e
        return levels

    def to_spectrum(self) -> Spectrum:
        return Spectrum.from_pairs(self.levels, quantum=self.quantum)


class InteractionConfig(BaseModel):
    """How the coupling operator is generated (or loaded)."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    kind: InteractionKind = Field(default=InteractionKind.FULL)
    delta: float = Field(default=0.01, ge=0.0, alias="deltaI", description="Std. dev. of matrix elements")
    matrix_file: Optional[str] = Field(
        None, description="Load the operator from .npy/.csv instead of sampling it"
    )
    save: Optional[str] = Field(
        None, description="Directory to dump each sampled operator into"
    )


class InitialStateConfig(BaseModel):
    """
    One product initial state.

    The gas part is given as level weights (random phases and Haar vectors
    inside degenerate levels) or as explicit [re, im] amplitudes; the
    container part as a single level index, level weights, or amplitudes.
    """

    model_config = ConfigDict(extra="forbid")

    gas_weights: Optional[list[float]] = None
    gas_amplitudes: Optional[list[tuple[float, float]]] = None
    container_level: Optional[int] = Field(None, ge=0)
    container_weights: Optional[list[float]] = None
    container_amplitudes: Optional[list[tuple[float, float]]] = None

    @field_validator("gas_weights", "container_weights")
    @classmethod
    def _normalized(cls, weights: Optional[list[float]]) -> Optional[list[float]]:
        if weights is None:
            return None
        if not weights or any(w < 0.0 for w in weights):
            raise ValueError("weights must be non-empty and non-negative")
        total = sum(weights)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {total}")
        return [w / total for w in weights]

    @model_validator(mode="after")
    def _one_of_each(self) -> "InitialStateConfig":
        gas = [self.gas_weights is not None, self.gas_amplitudes is not None]
        container = [
            self.container_level is not None,
            self.container_weights is not None,
            self.container_amplitudes is not None,
        ]
        if sum(gas) != 1:
            raise ValueError("give exactly one of gas_weights, gas_amplitudes")
        if sum(container) != 1:
            raise ValueError("give exactly one of container_level, container_weights, container_amplitudes")
        return self

    @field_validator("gas_amplitudes", "container_amplitudes")
    @classmethod
    def _unit_norm(cls, pairs: Optional[list[tuple[float, float]]]) -> Optional[list[tuple[float, float]]]:
        if pairs is None:
            return None
        norm_sq = sum(re * re + im * im for re, im in pairs)
        if not pairs or abs(norm_sq - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"amplitudes must have unit norm, got norm^2 = {norm_sq}")
        return pairs

    @staticmethod
    def _complex(pairs: list[tuple[float, float]]) -> np.ndarray:
        vector = np.array([re + 1j * im for re, im in pairs], dtype=np.complex128)
        return vector / np.linalg.norm(vector)

    def gas_vector(self) -> Optional[np.ndarray]:
        return None if self.gas_amplitudes is None else self._complex(self.gas_amplitudes)

    def container_vector(self) -> Optional[np.ndarray]:
        return None if self.container_amplitudes is None else self._complex(self.container_amplitudes)

    def container_level_weights(self, n_levels: int) -> Optional[list[float]]:
        """Container level weights, expanding ``container_level`` to a one-hot vector."""
        if self.container_level is not None:
            weights = [0.0] * n_levels
            weights[self.container_level] = 1.0
            return weights
        return self.container_weights


class TimeGridConfig(BaseModel):
    """Uniform sample grid on [0, t_end] in units hbar/dE."""

    model_config = ConfigDict(extra="forbid")

    t_end: float = Field(default=200.0, gt=0.0)
    samples: int = Field(default=1000, ge=10)
    plateau_fraction: float = Field(
        default=0.25, gt=0.0, le=1.0, description="Final fraction of the run averaged for plateaus"
    )

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.samples)


class HistogramConfig(BaseModel):
    """
    Sampling parameters.

    Unset values are filled from the runtime settings before a run, so the
    config embedded in result headers always carries all three.
    """

    model_config = ConfigDict(extra="forbid")

    samples: Optional[int] = Field(None, ge=1)
    bins: Optional[int] = Field(None, ge=1)
    batch_size: Optional[int] = Field(None, ge=1, description="States per sampling batch (one RNG sub-stream each)")


class SweepConfig(BaseModel):
    """
    Container-size sweep.

    For every size N1 the container degeneracies become N1/2 * 2^B on the
    configured container energies.
    """

    model_config = ConfigDict(extra="forbid")

    sizes: list[int] = Field(..., min_length=3)
    window_start: float = Field(
        default=0.25, ge=0.0, lt=1.0, description="Fluctuation window starts at this fraction of t_end"
    )

    @field_validator("sizes")
    @classmethod
    def _even_distinct(cls, sizes: list[int]) -> list[int]:
        for size in sizes:
            if size < 2 or size % 2:
                raise ValueError(f"container sizes must be even and >= 2, got {size}")
        if len(set(sizes)) != len(sizes):
            raise ValueError("container sizes must be distinct")
        return sizes


class ScenarioConfig(BaseModel):
    """
    Full description of one experiment run.

    The resolved config (including CLI overrides) is embedded in every
    output file and is sufficient to reproduce it.
    """

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., pattern=r"^[A-Za-z0-9][A-Za-z0-9_.-]*$", description="Scenario id")
    experiment: ExperimentKind = Field(default=ExperimentKind.PREDICT)
    gas: SpectrumConfig
    container: SpectrumConfig
    interaction: InteractionConfig = Field(default_factory=InteractionConfig)
    initial_states: list[InitialStateConfig] = Field(..., min_length=1)
    times: TimeGridConfig = Field(default_factory=TimeGridConfig)
    histogram: HistogramConfig = Field(default_factory=HistogramConfig)
    sweep: Optional[SweepConfig] = None
    seeds: Optional[list[int]] = Field(
        None, min_length=1, description="Run seeds; unset means the runtime default seed"
    )
    output_dir: Optional[str] = None

    @field_validator("seeds")
    @classmethod
    def _seeds_64bit(cls, seeds: Optional[list[int]]) -> Optional[list[int]]:
        for seed in seeds or ():
            if not 0 <= seed < 2**64:
                raise ValueError(f"seeds must fit in 64 bits, got {seed}")
        return seeds

    @model_validator(mode="after")
    def _consistent(self) -> "ScenarioConfig":
        if self.gas.quantum != self.container.quantum:
            raise ValueError("gas and container must share one energy quantum")
        gas_levels = len(self.gas.levels)
        container_levels = len(self.container.levels)
        gas_dim = sum(n for _, n in self.gas.levels)
        container_dim = sum(n for _, n in self.container.levels)
        for i, state in enumerate(self.initial_states):
            if state.gas_weights is not None and len(state.gas_weights) != gas_levels:
                raise ValueError(f"initial_states[{i}].gas_weights needs {gas_levels} entries")
            if state.gas_amplitudes is not None and len(state.gas_amplitudes) != gas_dim:
                raise ValueError(f"initial_states[{i}].gas_amplitudes needs {gas_dim} entries")
            if state.container_level is not None and state.container_level >= container_levels:
                raise ValueError(f"initial_states[{i}].container_level out of range")
            if state.container_weights is not None and len(state.container_weights) != container_levels:
                raise ValueError(f"initial_states[{i}].container_weights needs {container_levels} entries")
            if (
                state.container_amplitudes is not None
                and self.experiment is not ExperimentKind.FLUCTUATION_SWEEP
                and len(state.container_amplitudes) != container_dim
            ):
                raise ValueError(f"initial_states[{i}].container_amplitudes needs {container_dim} entries")
        if self.experiment is ExperimentKind.FLUCTUATION_SWEEP:
            if self.sweep is None:
                raise ValueError("fluctuation-sweep needs a 'sweep' section")
            if any(s.container_amplitudes is not None for s in self.initial_states):
                raise ValueError("fluctuation-sweep initial states cannot fix container amplitudes")
        return self

    def composite(self) -> CompositeSystem:
        return build_composite(self.gas.to_spectrum(), self.container.to_spectrum())

    def sweep_container(self, size: int) -> Spectrum:
        """Container spectrum for one sweep size: degeneracy N1/2 * 2^B at level B."""
        if size < 2 or size % 2:
            raise ConfigurationError(f"container size must be even, got {size}", field_path="sweep.sizes")
        pairs = [(energy, (size // 2) * 2**b) for b, (energy, _) in enumerate(self.container.levels)]
        return Spectrum.from_pairs(pairs, quantum=self.container.quantum)

    def to_json(self) -> str:
        """Compact, key-ordered JSON used in result headers."""
        return json.dumps(self.model_dump(mode="json", by_alias=True), separators=(",", ":"))

    def with_overrides(
        self,
        experiment: Optional[ExperimentKind] = None,
        seed: Optional[int] = None,
        samples: Optional[int] = None,
        bins: Optional[int] = None,
        output_dir: Optional[str] = None,
    ) -> "ScenarioConfig":
        """Return a validated copy with CLI overrides applied."""
        data = self.model_dump(mode="json", by_alias=True)
        if experiment is not None:
            data["experiment"] = ExperimentKind(experiment).value
        if seed is not None:
            data["seeds"] = [seed]
        if samples is not None:
            data["histogram"]["samples"] = samples
        if bins is not None:
            data["histogram"]["bins"] = bins
        if output_dir is not None:
            data["output_dir"] = output_dir
        return parse_scenario(data)


def _field_path(error: dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ()))


def parse_scenario(data: dict[str, Any]) -> ScenarioConfig:
    """
    Validate a scenario document.

    Raises:
        ConfigurationError: With the dotted path of the first offending field
    """
    try:
        return ScenarioConfig.model_validate(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        message = first.get("msg", "invalid value").removeprefix("Value error, ")
        raise ConfigurationError(
            message,
            field_path=_field_path(first) or None,
            details={"errors": e.error_count()},
        ) from e


def read_config_header(path: Path) -> dict[str, Any]:
    """Extract the resolved config embedded in a result CSV."""
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            if line.startswith(CONFIG_HEADER):
                return json.loads(line[len(CONFIG_HEADER):])
    raise ConfigurationError(f"No '{CONFIG_HEADER.strip()}' header in {path}")


def load_scenario(path: str | Path) -> ScenarioConfig:
    """
    Load a scenario from a JSON file or replay one from a result CSV.

    Args:
        path: ``*.json`` scenario or any ``*.csv`` written by qtl

    Returns:
        Validated ScenarioConfig
    """
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            data = read_config_header(path)
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Invalid JSON in {path}: {e.msg} (line {e.lineno})", cause=e) from e
    except OSError as e:
        raise StorageError(f"Could not read {path}", path=str(path), operation="load_scenario", cause=e) from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Scenario in {path} must be a JSON object")
    return parse_scenario(data)
