"""
Relaxation runs: exact propagation from product initial states.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import uniform_filter1d

from qtl.core.rng import StreamFactory
from qtl.core.schemas import ExperimentKind
from qtl.experiments.base import BaseExperiment, ExperimentFactory, ExperimentReport, stderr
from qtl.physics.dynamics import Propagator, Trajectory, assemble_hamiltonian, propagate, relaxation_time
from qtl.physics.interactions import CouplingDiagnostics, coupling_diagnostics
from qtl.physics.theory import Prediction, equilibrium_state, predict
from qtl.storage import gnuplot
from qtl.storage.results import ResultStore
from qtl.workers.pool import run_parallel

RELAXATION_TOLERANCE = 0.05
SMOOTHING_FRACTION = 0.02


@dataclass
class EvolveRun:
    """One (seed, initial state) trajectory with its diagnostics."""

    seed: int
    state: int
    trajectory: Trajectory
    prediction: Prediction
    coupling: CouplingDiagnostics

    def plateaus(self, fraction: float) -> dict[str, float]:
        t = self.trajectory
        values = {
            f"W_g_{i}": t.plateau(t.gas_occupations[:, i], fraction)
            for i in range(t.gas_occupations.shape[1])
        }
        values["P_g"] = t.plateau(t.purity, fraction)
        values["S_g"] = t.plateau(t.entropy, fraction)
        values["d"] = t.plateau(t.distance, fraction)
        return values

    def predicted(self) -> dict[str, float]:
        p = self.prediction
        values = {f"W_g_{i}": float(w) for i, w in enumerate(p.gas_weights)}
        values["P_g"] = p.hs_average_purity_exact
        values["S_g"] = p.max_entropy
        values["d"] = p.hs_average_purity_exact - p.min_purity
        return values

    def relaxation_time(self) -> Optional[float]:
        """When the smoothed ground-level occupation settles near its prediction."""
        t = self.trajectory
        window = max(1, int(SMOOTHING_FRACTION * t.times.size))
        smoothed = uniform_filter1d(t.gas_occupations[:, 0], size=window, mode="nearest")
        return relaxation_time(smoothed, t.times, float(self.prediction.gas_weights[0]), RELAXATION_TOLERANCE)

    def drifts(self) -> dict[str, float]:
        t = self.trajectory
        return {
            "energy_drift": float(np.max(np.abs(t.energy - t.energy[0]))),
            "decoupled_energy_drift": float(np.max(np.abs(t.local_energy - t.local_energy[0]))),
            "joint_drift": float(np.max(np.abs(t.joint_occupations - t.joint_occupations[0]))),
            "norm_drift": float(np.max(np.abs(t.norm - 1.0))),
        }


@dataclass
class EvolveResult:
    runs: list[EvolveRun]


@ExperimentFactory.register
class EvolveExperiment(BaseExperiment):
    """
    One trajectory per seed and initial state.

    Each seed draws one interaction realization; all initial states of that
    seed share its eigendecomposition. Seeds run in parallel.
    """

    kind = ExperimentKind.EVOLVE
    file_kind = "evolve"

    def run(self) -> EvolveResult:
        composite = self.config.composite()
        times = self.config.times.times()
        exchange = self.energy_exchange()
        gas_h = composite.gas_hamiltonian()
        container_h = composite.container_hamiltonian()

        def run_seed(seed: int) -> list[EvolveRun]:
            streams = StreamFactory(seed)
            interaction = self.build_interaction(composite, streams)
            propagator = Propagator(
                assemble_hamiltonian(composite, interaction),
                max_dimension=self.settings.max_dimension,
                scenario_id=self.config.name,
            )
            runs = []
            for initial in self.prepare_states(composite, streams):
                prediction = predict(composite, initial.gas_weights, initial.container_weights, exchange)
                trajectory = propagate(
                    propagator,
                    initial.state,
                    times,
                    composite,
                    reference=equilibrium_state(prediction.gas_weights, composite.gas),
                    metadata={
                        "scenario_id": self.config.name,
                        "seed": seed,
                        "state": initial.index,
                        "deltaI": self.config.interaction.delta,
                    },
                )
                runs.append(
                    EvolveRun(
                        seed=seed,
                        state=initial.index,
                        trajectory=trajectory,
                        prediction=prediction,
                        coupling=coupling_diagnostics(initial.state, interaction, gas_h, container_h),
                    )
                )
            self.log.info("Seed complete", seed=seed, runs=len(runs))
            return runs

        per_seed = run_parallel(run_seed, self.config.seeds, self.max_workers, label="evolve")
        return EvolveResult(runs=[run for runs in per_seed for run in runs])

    def run_rows(self, result: EvolveResult) -> tuple[list[str], list[list[object]]]:
        fraction = self.config.times.plateau_fraction
        columns: list[str] = []
        rows = []
        for run in result.runs:
            plateaus = run.plateaus(fraction)
            drifts = run.drifts()
            if not columns:
                columns = (
                    ["seed", "state"]
                    + [f"{key}_plateau" for key in plateaus]
                    + ["relaxation_time"]
                    + list(drifts)
                    + ["i_rms", "coupling_ratio"]
                )
            rows.append(
                [run.seed, run.state]
                + list(plateaus.values())
                + [run.relaxation_time()]
                + list(drifts.values())
                + [run.coupling.i_rms, run.coupling.ratio]
            )
        return columns, rows

    def summary_rows(self, result: EvolveResult) -> list[list[object]]:
        """Plateau mean and standard error per initial state and observable."""
        fraction = self.config.times.plateau_fraction
        rows = []
        for state in sorted({run.state for run in result.runs}):
            runs = [run for run in result.runs if run.state == state]
            plateaus = [run.plateaus(fraction) for run in runs]
            predicted = runs[0].predicted()
            for key in plateaus[0]:
                values = np.array([p[key] for p in plateaus])
                rows.append([state, key, float(values.mean()), stderr(values), predicted[key], values.size])
        return rows

    def write(self, result: EvolveResult, store: ResultStore) -> ExperimentReport:
        several_states = len(self.config.initial_states) > 1
        names = []
        for run in result.runs:
            t = run.trajectory
            path = store.write_table(
                self.file_kind,
                t.columns,
                t.table(),
                seed=run.seed,
                tag=f"state{run.state}" if several_states else None,
            )
            names.append(path.name)

        columns, rows = self.run_rows(result)
        store.write_table(
            self.file_kind, columns, rows, file_kind=f"{self.file_kind}_runs", header_seed=self.config.seeds
        )
        summary = self.summary_rows(result)
        store.write_table(
            self.file_kind,
            ["state", "observable", "mean", "stderr", "predicted", "runs"],
            summary,
            file_kind=f"{self.file_kind}_summary",
            header_seed=self.config.seeds,
        )

        first = result.runs[0]
        store.write_script(
            self.file_kind,
            gnuplot.evolve_script(
                names,
                first.trajectory.gas_occupations.shape[1],
                first.prediction.max_entropy,
                first.prediction.gas_weights,
                f"{self.config.name}: relaxation",
            ),
            seed=self.config.seeds,
        )

        report_rows = [
            (f"state{state}.{key}", f"{mean:.4f} ± {err:.4f}  (predicted {pred:.4f})")
            for state, key, mean, err, pred, _ in summary
        ]
        worst = max(run.drifts()["norm_drift"] for run in result.runs)
        report_rows.append(("max_norm_drift", worst))
        return ExperimentReport(kind=self.kind, scenario=self.config.name, rows=report_rows)
