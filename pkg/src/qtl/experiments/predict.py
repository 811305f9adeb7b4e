"""
Closed-form prediction report.
"""

from dataclasses import dataclass

from qtl.core.rng import StreamFactory
from qtl.core.schemas import ExperimentKind
from qtl.experiments.base import BaseExperiment, ExperimentFactory, ExperimentReport, InitialState
from qtl.physics.theory import Prediction, predict
from qtl.storage.results import ResultStore


@dataclass
class PredictResult:
    predictions: list[tuple[InitialState, Prediction]]


@ExperimentFactory.register
class PredictExperiment(BaseExperiment):
    """
    Evaluates every theory formula for each configured initial state.

    Level weights come from the configured state; sampling randomness does
    not enter.
    """

    kind = ExperimentKind.PREDICT
    file_kind = "predict"

    def run(self) -> PredictResult:
        composite = self.config.composite()
        states = self.prepare_states(composite, StreamFactory(self.config.seeds[0]))
        exchange = self.energy_exchange()
        predictions = [
            (state, predict(composite, state.gas_weights, state.container_weights, exchange))
            for state in states
        ]
        self.log.debug("Predictions computed", states=len(predictions), energy_exchange=exchange)
        return PredictResult(predictions=predictions)

    def write(self, result: PredictResult, store: ResultStore) -> ExperimentReport:
        rows = [
            (state.index, key, value)
            for state, prediction in result.predictions
            for key, value in prediction.rows()
        ]
        store.write_table(self.file_kind, ["state", "key", "value"], rows, header_seed=self.config.seeds[0])

        first_state, first = result.predictions[0]
        report = ExperimentReport(kind=self.kind, scenario=self.config.name, rows=first.rows())
        for state, prediction in result.predictions:
            report.notes += [f"state {state.index}: {note}" for note in prediction.notes]
        if len(result.predictions) > 1:
            report.notes.append(
                f"table shows state {first_state.index}; all {len(result.predictions)} states are in the CSV"
            )
        return report
