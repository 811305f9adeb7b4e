"""Experiments and the kind -> class registry.

Importing this package registers every built-in experiment.
"""

from qtl.experiments.base import BaseExperiment, ExperimentFactory, ExperimentReport
from qtl.experiments.evolve import EvolveExperiment
from qtl.experiments.histogram import HistogramExperiment
from qtl.experiments.predict import PredictExperiment
from qtl.experiments.sweep import SweepExperiment

__all__ = [
    "BaseExperiment",
    "ExperimentFactory",
    "ExperimentReport",
    "EvolveExperiment",
    "HistogramExperiment",
    "PredictExperiment",
    "SweepExperiment",
]
