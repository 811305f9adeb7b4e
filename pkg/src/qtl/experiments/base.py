"""
Base experiment protocol and factory.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Type

import numpy as np
import structlog

from qtl.config import Settings, get_settings
from qtl.core.exceptions import ConfigurationError
from qtl.core.rng import StreamFactory
from qtl.core.schemas import ExperimentKind, InitialStateConfig, InteractionKind, ScenarioConfig
from qtl.physics.interactions import (
    HermitianOperator,
    load_operator,
    microcanonical_interaction,
    random_hermitian,
    save_operator,
    shell_interaction,
)
from qtl.physics.spectra import CompositeSystem, Spectrum
from qtl.physics.states import PureState, local_vector, product_state
from qtl.storage.results import ResultStore

logger = structlog.get_logger(__name__)


@dataclass
class ExperimentReport:
    """What the CLI shows after a run: summary rows and written files."""

    kind: ExperimentKind
    scenario: str
    rows: list[tuple[str, Any]] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class InitialState:
    """A prepared product state with its level weights."""

    index: int
    state: PureState
    gas_weights: np.ndarray
    container_weights: np.ndarray


def level_weights(vector: np.ndarray, spectrum: Spectrum) -> np.ndarray:
    """Level occupation of a local vector."""
    return np.add.reduceat(np.abs(vector) ** 2, spectrum.offsets)


class BaseExperiment(ABC):
    """
    Abstract base class for experiments.

    Subclasses implement ``run`` (pure computation, returns a result object)
    and ``write`` (result files plus the report shown by the CLI).
    """

    kind: ExperimentKind
    file_kind: str

    def __init__(
        self,
        config: ScenarioConfig,
        settings: Optional[Settings] = None,
        max_workers: Optional[int] = None,
    ):
        self.settings = settings or get_settings()
        self.config = self.resolve(config)
        self.max_workers = max_workers if max_workers is not None else self.settings.max_workers
        self.log = logger.bind(scenario=config.name, experiment=self.kind.value)

    def resolve(self, config: ScenarioConfig) -> ScenarioConfig:
        """Fill settings-dependent defaults so the embedded config alone reproduces the run."""
        if config.seeds is None:
            config = config.model_copy(update={"seeds": [self.settings.default_seed]})
        return config

    @abstractmethod
    def run(self) -> Any:
        """Compute the experiment's results."""
        pass

    @abstractmethod
    def write(self, result: Any, store: ResultStore) -> ExperimentReport:
        """Write result files and summarize them."""
        pass

    def execute(self, output_dir: Optional[str | Path] = None) -> ExperimentReport:
        """Run, then write into ``output_dir`` (or the config's / settings' directory)."""
        target = output_dir or self.config.output_dir or self.settings.output_dir
        store = ResultStore(target, self.config.name, self.config.to_json())
        self.log.info("Experiment started", output_dir=str(target))
        result = self.run()
        report = self.write(result, store)
        report.files = list(store.written)
        self.log.info("Experiment complete", files=len(report.files))
        return report

    def build_interaction(
        self,
        composite: CompositeSystem,
        streams: StreamFactory,
        index: int = 0,
    ) -> HermitianOperator:
        """
        Sample (or load) the coupling operator for one realization.

        Args:
            composite: System the operator acts on
            streams: Stream factory of the run's seed
            index: Realization index (sweep size, ...)
        """
        spec = self.config.interaction
        if spec.matrix_file:
            operator = load_operator(spec.matrix_file)
            if operator.dimension != composite.dimension:
                raise ConfigurationError(
                    f"Operator in {spec.matrix_file} has dimension {operator.dimension}, "
                    f"expected {composite.dimension}",
                    field_path="interaction.matrix_file",
                )
            return operator

        rng = streams.stream("interaction", index)
        if spec.kind is InteractionKind.MICROCANONICAL:
            operator = microcanonical_interaction(composite, spec.delta, rng)
        elif spec.kind is InteractionKind.SHELL:
            operator = shell_interaction(composite, spec.delta, rng)
        else:
            operator = random_hermitian(composite.dimension, spec.delta, rng)

        if spec.save:
            path = Path(spec.save) / f"{self.config.name}_interaction_seed{streams.seed}_{index}.npy"
            save_operator(operator, path)
        return operator

    def prepare_states(
        self,
        composite: CompositeSystem,
        streams: StreamFactory,
        states: Optional[Sequence[InitialStateConfig]] = None,
        index: int = 0,
    ) -> list[InitialState]:
        """Realize the configured initial product states for one seed."""
        prepared = []
        for i, spec in enumerate(states if states is not None else self.config.initial_states):
            rng = streams.stream(f"initial-state/{i}", index)
            gas = spec.gas_vector()
            if gas is None:
                gas = local_vector(composite.gas, spec.gas_weights, rng)
            container = spec.container_vector()
            if container is None:
                weights = spec.container_level_weights(len(composite.container))
                container = local_vector(composite.container, weights, rng)
            prepared.append(
                InitialState(
                    index=i,
                    state=product_state(gas, container, composite),
                    gas_weights=level_weights(gas, composite.gas),
                    container_weights=level_weights(container, composite.container),
                )
            )
        return prepared

    def energy_exchange(self) -> bool:
        return self.config.interaction.kind is not InteractionKind.MICROCANONICAL


def stderr(values: np.ndarray) -> float:
    """Standard error of the mean (nan for a single value)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return float("nan")
    return float(values.std(ddof=1) / np.sqrt(values.size))


class ExperimentFactory:
    """
    Registry of experiment classes by kind.

    Can be used as a decorator:
        @ExperimentFactory.register
        class MyExperiment(BaseExperiment):
            ...
    """

    _experiments: dict[ExperimentKind, Type[BaseExperiment]] = {}

    @classmethod
    def register(cls, experiment_class: Type[BaseExperiment]) -> Type[BaseExperiment]:
        cls._experiments[experiment_class.kind] = experiment_class
        return experiment_class

    @classmethod
    def create(
        cls,
        kind: ExperimentKind | str,
        config: ScenarioConfig,
        settings: Optional[Settings] = None,
        max_workers: Optional[int] = None,
    ) -> BaseExperiment:
        """
        Build the experiment for ``kind``.

        The config is re-resolved with ``experiment=kind`` so the embedded
        header always names the experiment that produced the file.

        Raises:
            ConfigurationError: If no experiment is registered for ``kind``
        """
        try:
            kind = ExperimentKind(kind)
            experiment_class = cls._experiments[kind]
        except (ValueError, KeyError) as e:
            raise ConfigurationError(
                f"Unknown experiment kind: {kind}",
                field_path="experiment",
                details={"registered": cls.list_kinds()},
            ) from e
        if config.experiment is not kind:
            config = config.with_overrides(experiment=kind)
        return experiment_class(config, settings=settings, max_workers=max_workers)

    @classmethod
    def list_kinds(cls) -> list[str]:
        return [kind.value for kind in cls._experiments]
