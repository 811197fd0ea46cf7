"""
The plant: a current source u, a capacitance C0 and a Josephson junction in parallel.

The junction is modelled classically as the current-dependent inductance

    L(x1) = L0 / sqrt(1 - (x1 / I0)^2),   L0 = kappa / I0

and the state (x1, x2) is (inductor current, capacitor voltage). The output is the
stored energy h(x1, x2) = 1/2 L(x1) x1^2 + 1/2 C0 x2^2.

Differentiating h with the inductance law gives

    dh/dx1 = x1 L(x1) [1 + gamma x1^2 L(x1)^2],   gamma = 1 / (2 I0^2 L0^2)

Some derivations print the coefficient as 1 / (2 I0 L0^2); the two only agree when
I0 = 1. The value used here is the one the finite-difference check in the test suite
confirms.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

from jjosc.exceptions import DomainError
from jjosc.utils.constants import DOMAIN_MARGIN


@dataclass(frozen=True)
class CircuitParams:
    """
    Physical constants of the oscillator.

    Attributes:
        I0 (float): Junction critical current [A].
        kappa (float): Flux-like junction constant [V s].
        C0 (float): Capacitance [F].
    """

    I0: float
    kappa: float
    C0: float

    def __post_init__(self):
        for name in ("I0", "kappa", "C0"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {value}")

    @property
    def L0(self) -> float:
        """Zero-current inductance kappa / I0 [H]."""
        return self.kappa / self.I0


class State(NamedTuple):
    """Instantaneous state: inductor current x1 [A] and capacitor voltage x2 [V]."""

    x1: float
    x2: float


def admissible_limit(p: CircuitParams) -> float:
    """Largest |x1| accepted by the inductance model."""
    return p.I0 * (1.0 - DOMAIN_MARGIN)


def check_admissible(p: CircuitParams, x1: float) -> None:
    """
    Raise DomainError unless |x1| is strictly below the critical current.

    Args:
        p (CircuitParams): Circuit constants.
        x1 (float): Junction current [A].

    Raises:
        DomainError: If |x1| >= I0 (within the guard margin) or x1 is not finite.
    """
    if not abs(x1) < admissible_limit(p):
        raise DomainError(
            f"junction current |x1| = {abs(x1):.6g} A reaches critical current I0 = {p.I0:.6g} A"
        )


def gamma(p: CircuitParams) -> float:
    """Coefficient of the nonlinear term in dh/dx1: 1 / (2 I0^2 L0^2)."""
    return 1.0 / (2.0 * p.I0**2 * p.L0**2)


def inductance(p: CircuitParams, x1: float) -> float:
    """
    Evaluate the junction inductance L(x1) = L0 / sqrt(1 - (x1/I0)^2).

    Args:
        p (CircuitParams): Circuit constants.
        x1 (float): Junction current [A].

    Returns:
        float: Inductance [H], never below L0.

    Raises:
        DomainError: If |x1| >= I0.
    """
    check_admissible(p, x1)
    ratio = x1 / p.I0
    return p.L0 / math.sqrt(1.0 - ratio * ratio)


def dynamics(p: CircuitParams, s: State, u: float) -> Tuple[float, float]:
    """
    State derivatives of the circuit.

    Args:
        p (CircuitParams): Circuit constants.
        s (State): Current state.
        u (float): Source current [A].

    Returns:
        Tuple[float, float]: (dx1/dt, dx2/dt) = (x2 / L(x1), -(x1 + u) / C0).

    Raises:
        DomainError: If |x1| >= I0.
    """
    x1, x2 = s
    return x2 / inductance(p, x1), -(x1 + u) / p.C0


def output_energy(p: CircuitParams, s: State) -> float:
    """Stored energy y = 1/2 L(x1) x1^2 + 1/2 C0 x2^2 [J]."""
    x1, x2 = s
    return 0.5 * inductance(p, x1) * x1 * x1 + 0.5 * p.C0 * x2 * x2


def stored_energy_split(p: CircuitParams, s: State) -> Tuple[float, float]:
    """Return the (inductive, capacitive) parts of output_energy."""
    x1, x2 = s
    return 0.5 * inductance(p, x1) * x1 * x1, 0.5 * p.C0 * x2 * x2


def output_gradient(p: CircuitParams, s: State) -> Tuple[float, float]:
    """
    Exact partial derivatives of output_energy.

    Args:
        p (CircuitParams): Circuit constants.
        s (State): State at which to differentiate.

    Returns:
        Tuple[float, float]: (dh/dx1, dh/dx2) with
            dh/dx1 = x1 L(x1) [1 + gamma x1^2 L(x1)^2] and dh/dx2 = C0 x2.

    Raises:
        DomainError: If |x1| >= I0.
    """
    x1, x2 = s
    L = inductance(p, x1)
    return x1 * L * (1.0 + gamma(p) * x1 * x1 * L * L), p.C0 * x2
