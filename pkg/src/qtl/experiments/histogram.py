"""
Entropy histogram over the accessible region.
"""

import math
from dataclasses import dataclass

import numpy as np

from qtl.core.rng import StreamFactory
from qtl.core.schemas import ExperimentKind, ScenarioConfig
from qtl.experiments.base import BaseExperiment, ExperimentFactory, ExperimentReport, stderr
from qtl.physics.spectra import CompositeSystem
from qtl.physics.states import JointDistribution, gas_entropies, gas_purities, sample_accessible_region_batch
from qtl.physics.theory import hs_average_purity_approx, hs_average_purity_exact, max_entropy
from qtl.storage import gnuplot
from qtl.storage.results import ResultStore
from qtl.workers.pool import run_parallel

# Absolute entropy thresholds (k_B) reported as sample fractions.
ENTROPY_THRESHOLDS = (0.2, 0.3, 0.4)


@dataclass
class HistogramResult:
    seed: int
    samples: int
    accessible_dimension: int
    s_max: float
    edges: np.ndarray
    frequencies: np.ndarray
    entropies: np.ndarray
    purities: np.ndarray
    hs_exact: float
    hs_approx: float


@ExperimentFactory.register
class HistogramExperiment(BaseExperiment):
    """
    Samples the accessible region of the first initial state's joint
    distribution and bins the local entropies on [0, S_max].

    Sampling runs in fixed-size batches; batch ``b`` draws from sub-stream
    ("histogram", b), so results do not depend on the worker count.
    """

    kind = ExperimentKind.HISTOGRAM
    file_kind = "histogram"

    def resolve(self, config: ScenarioConfig) -> ScenarioConfig:
        config = super().resolve(config)
        sampling = config.histogram
        filled = sampling.model_copy(
            update={
                "samples": sampling.samples or self.settings.histogram_samples,
                "bins": sampling.bins or self.settings.histogram_bins,
                "batch_size": sampling.batch_size or self.settings.histogram_batch_size,
            }
        )
        return config.model_copy(update={"histogram": filled})

    @property
    def samples(self) -> int:
        return self.config.histogram.samples

    @property
    def bins(self) -> int:
        return self.config.histogram.bins

    def run(self) -> HistogramResult:
        composite = self.config.composite()
        seed = self.config.seeds[0]
        streams = StreamFactory(seed)
        state = self.prepare_states(composite, streams)[0]
        target = JointDistribution.product(state.gas_weights, state.container_weights)

        batch_size = self.config.histogram.batch_size
        batches = [
            (b, min(batch_size, self.samples - b * batch_size))
            for b in range(math.ceil(self.samples / batch_size))
        ]

        def sample_batch(batch: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
            index, size = batch
            amplitudes = sample_accessible_region_batch(
                composite, target, streams.stream("histogram", index), size
            )
            return gas_entropies(amplitudes, composite), gas_purities(amplitudes, composite)

        results = run_parallel(sample_batch, batches, self.max_workers, label="histogram")
        entropies = np.concatenate([r[0] for r in results])
        purities = np.concatenate([r[1] for r in results])

        s_max = max_entropy(state.gas_weights, composite.gas)
        edges, frequencies = entropy_histogram(entropies, s_max, self.bins)
        self.log.info("Sampling complete", samples=entropies.size, mean_purity=float(purities.mean()))
        return HistogramResult(
            seed=seed,
            samples=entropies.size,
            accessible_dimension=accessible_dimension(composite, target),
            s_max=s_max,
            edges=edges,
            frequencies=frequencies,
            entropies=entropies,
            purities=purities,
            hs_exact=hs_average_purity_exact(
                state.gas_weights, state.container_weights, composite.gas, composite.container
            ),
            hs_approx=hs_average_purity_approx(
                state.gas_weights, state.container_weights, composite.gas, composite.container
            ),
        )

    def summary_rows(self, result: HistogramResult) -> list[tuple[str, object]]:
        rows: list[tuple[str, object]] = [
            ("samples", result.samples),
            ("accessible_dimension", result.accessible_dimension),
            ("bins", result.frequencies.size),
            ("max_entropy", result.s_max),
            ("mean_entropy", float(result.entropies.mean())),
            ("mean_purity", float(result.purities.mean())),
            ("purity_stderr", stderr(result.purities)),
            ("hs_average_purity_exact", result.hs_exact),
            ("hs_average_purity_approx", result.hs_approx),
            ("mode_bin", int(np.argmax(result.frequencies))),
        ]
        for threshold in ENTROPY_THRESHOLDS:
            rows.append((f"fraction_S_below_{threshold}", float(np.mean(result.entropies < threshold))))
            rows.append((f"fraction_S_above_{threshold}", float(np.mean(result.entropies > threshold))))
        return rows

    def write(self, result: HistogramResult, store: ResultStore) -> ExperimentReport:
        centers = 0.5 * (result.edges[:-1] + result.edges[1:])
        rows = [
            (i, result.edges[i], centers[i], result.frequencies[i])
            for i in range(result.frequencies.size)
        ]
        path = store.write_table(
            self.file_kind, ["bin", "s_low", "s_center", "frequency"], rows, header_seed=result.seed
        )
        summary = self.summary_rows(result)
        store.write_key_values(
            self.file_kind, summary, file_kind=f"{self.file_kind}_summary", header_seed=result.seed
        )
        store.write_script(
            self.file_kind,
            gnuplot.histogram_script(path.name, result.s_max, f"{self.config.name}: local entropy"),
            seed=result.seed,
        )
        return ExperimentReport(kind=self.kind, scenario=self.config.name, rows=summary)


def entropy_histogram(entropies: np.ndarray, s_max: float, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Relative frequencies of ``entropies`` in ``bins`` uniform bins on [0, S_max].

    Values above S_max by round-off land in the last bin. When S_max is zero
    the range [0, 1] is used, so all mass falls into the first bin.
    """
    upper = s_max if s_max > 0.0 else 1.0
    counts, edges = np.histogram(np.clip(entropies, 0.0, upper), bins=bins, range=(0.0, upper))
    return edges, counts / entropies.size


def accessible_dimension(composite: CompositeSystem, target: JointDistribution) -> int:
    """Number of basis states in blocks with non-zero target weight."""
    gas_levels, container_levels = composite.level_shape
    return sum(
        composite.block_dimension(a, b)
        for a in range(gas_levels)
        for b in range(container_levels)
        if target.weights[a, b] > 0.0
    )
