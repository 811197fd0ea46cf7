from .circuit import CircuitParams, State, output_energy, output_gradient
from .simulation import SimConfig, simulate_nonlinear
from .taylor import linearize, natural_frequency
from .feedback_linearization import ReferenceModel, exact_control, run_exact_fl
from .trainer import FeedbackGains, TrainConfig, performance_index, train

__all__ = [
    "CircuitParams",
    "State",
    "output_energy",
    "output_gradient",
    "SimConfig",
    "simulate_nonlinear",
    "linearize",
    "natural_frequency",
    "ReferenceModel",
    "exact_control",
    "run_exact_fl",
    "FeedbackGains",
    "TrainConfig",
    "performance_index",
    "train",
]
