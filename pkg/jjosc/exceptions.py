from typing import Any, Optional


class CircuitError(Exception):
    """
    Base class for errors raised while evaluating or simulating the circuit.

    Attributes:
        trajectory (Optional[Trajectory]): The samples produced before the failure, when the
            error was raised from inside a simulation. None otherwise.
    """

    def __init__(self, message: str, trajectory: Optional[Any] = None):
        super().__init__(message)
        self.trajectory = trajectory


class DomainError(CircuitError, ValueError):
    """Raised when a junction current reaches the critical current I0."""


class TrajectoryTruncatedError(DomainError):
    """Raised when a simulated state leaves the admissible region |x1| < I0."""


class SingularityError(CircuitError, ArithmeticError):
    """Raised when the exact linearizing control is evaluated at |x2| <= x2_min."""


class ResonanceError(CircuitError, ArithmeticError):
    """Raised when the undamped transfer function is evaluated at its natural frequency."""


class ScenarioError(ValueError):
    """Raised for malformed, incomplete or unknown scenario configuration."""
