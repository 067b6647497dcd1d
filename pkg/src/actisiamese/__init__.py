"""Streaming classification with siamese networks and one-by-one active learning."""

from .active import BudgetTracker, VariableThreshold, should_query_fixed
from .evaluation import AggregateCurve, PrequentialGMean, aggregate
from .experiment import ExperimentConfig, run_experiment, run_single, sweep_budget
from .learners import ActiQLearner, ActiSiameseLearner, IncrementalLearner, LabelOracle, SiameseNetwork
from .memory import QueueStore, prepare_pairs
from .streamgen import Instance, StreamGenerator, make_initial_labelled

__version__ = "0.1.0"

__all__ = [
    "ActiQLearner",
    "ActiSiameseLearner",
    "AggregateCurve",
    "BudgetTracker",
    "ExperimentConfig",
    "IncrementalLearner",
    "Instance",
    "LabelOracle",
    "PrequentialGMean",
    "QueueStore",
    "SiameseNetwork",
    "StreamGenerator",
    "VariableThreshold",
    "aggregate",
    "make_initial_labelled",
    "prepare_pairs",
    "run_experiment",
    "run_single",
    "should_query_fixed",
    "sweep_budget",
]
