from .ab_test import ABResult, ab_compare, arm_of
from .engine import SimulationEngine, first_occurrence_fraction, run
from .estimator import TrainedModel, estimate_probabilities, train_model
from .metrics import DayMetrics, Metrics
from .policies import PolicySpec

__all__ = [
    'ABResult', 'ab_compare', 'arm_of', 'SimulationEngine', 'first_occurrence_fraction', 'run',
    'TrainedModel', 'estimate_probabilities', 'train_model', 'DayMetrics', 'Metrics', 'PolicySpec',
]
