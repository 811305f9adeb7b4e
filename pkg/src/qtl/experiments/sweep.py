"""
Finite-size fluctuation sweep.
"""

from dataclasses import dataclass

import numpy as np

from qtl.core.rng import StreamFactory
from qtl.core.schemas import ExperimentKind
from qtl.experiments.base import BaseExperiment, ExperimentFactory, ExperimentReport, stderr
from qtl.physics.dynamics import (
    Propagator,
    ScalingFit,
    assemble_hamiltonian,
    fit_inverse_size_scaling,
    propagate,
    time_fluctuation,
)
from qtl.physics.spectra import build_composite
from qtl.storage import gnuplot
from qtl.storage.results import ResultStore
from qtl.workers.pool import run_parallel


@dataclass(frozen=True)
class SweepSample:
    size: int
    seed: int
    state: int
    deviation: float
    plateau: float


@dataclass(frozen=True)
class SweepPoint:
    size: int
    deviation: float
    deviation_stderr: float
    samples: int


@dataclass
class SweepResult:
    samples: list[SweepSample]
    points: list[SweepPoint]
    fit: ScalingFit


@ExperimentFactory.register
class SweepExperiment(BaseExperiment):
    """
    Ground-level occupation fluctuations against container size.

    For every size N1 the container gets degeneracies N1/2 * 2^B; each
    (size, seed) pair is one independent task with its own interaction.
    The deviation is the square root of the temporal variance over
    [window_start * t_end, t_end].
    """

    kind = ExperimentKind.FLUCTUATION_SWEEP
    file_kind = "sweep"

    def run(self) -> SweepResult:
        sweep = self.config.sweep
        gas = self.config.gas.to_spectrum()
        times = self.config.times.times()
        t_end = float(times[-1])
        t_start = sweep.window_start * t_end

        def run_point(task: tuple[int, int]) -> list[SweepSample]:
            size, seed = task
            composite = build_composite(gas, self.config.sweep_container(size))
            streams = StreamFactory(seed)
            propagator = Propagator(
                assemble_hamiltonian(composite, self.build_interaction(composite, streams, index=size)),
                max_dimension=self.settings.max_dimension,
                scenario_id=self.config.name,
            )
            samples = []
            for initial in self.prepare_states(composite, streams, index=size):
                trajectory = propagate(
                    propagator,
                    initial.state,
                    times,
                    composite,
                    metadata={"scenario_id": self.config.name, "seed": seed, "size": size},
                )
                ground = trajectory.gas_occupations[:, 0]
                samples.append(
                    SweepSample(
                        size=size,
                        seed=seed,
                        state=initial.index,
                        deviation=float(np.sqrt(time_fluctuation(ground, times, t_start, t_end))),
                        plateau=trajectory.plateau(ground, 1.0 - sweep.window_start),
                    )
                )
            self.log.info("Sweep point complete", size=size, seed=seed, dimension=composite.dimension)
            return samples

        tasks = [(size, seed) for size in sweep.sizes for seed in self.config.seeds]
        samples = [s for batch in run_parallel(run_point, tasks, self.max_workers, label="sweep") for s in batch]

        points = []
        for size in sweep.sizes:
            values = np.array([s.deviation for s in samples if s.size == size])
            points.append(
                SweepPoint(
                    size=size,
                    deviation=float(values.mean()),
                    deviation_stderr=stderr(values),
                    samples=values.size,
                )
            )
        fit = fit_inverse_size_scaling([p.size for p in points], [p.deviation for p in points])
        self.log.info("Scaling fit", exponent=fit.exponent, coefficient=fit.coefficient)
        return SweepResult(samples=samples, points=points, fit=fit)

    def write(self, result: SweepResult, store: ResultStore) -> ExperimentReport:
        seeds = self.config.seeds
        store.write_table(
            self.file_kind,
            ["size", "seed", "state", "deviation", "plateau"],
            [(s.size, s.seed, s.state, s.deviation, s.plateau) for s in result.samples],
            header_seed=seeds,
        )
        points = store.write_table(
            self.file_kind,
            ["size", "deviation", "stderr", "samples"],
            [(p.size, p.deviation, p.deviation_stderr, p.samples) for p in result.points],
            file_kind=f"{self.file_kind}_points",
            header_seed=seeds,
        )
        fit_rows = result.fit.rows()
        store.write_key_values(self.file_kind, fit_rows, file_kind=f"{self.file_kind}_fit", header_seed=seeds)
        store.write_script(
            self.file_kind,
            gnuplot.sweep_script(
                points.name,
                result.fit.coefficient,
                result.fit.exponent,
                result.fit.fixed_coefficient,
                f"{self.config.name}: fluctuation scaling",
            ),
            seed=seeds,
        )
        rows: list[tuple[str, object]] = [(f"N1={p.size}", p.deviation) for p in result.points]
        return ExperimentReport(kind=self.kind, scenario=self.config.name, rows=rows + fit_rows)
