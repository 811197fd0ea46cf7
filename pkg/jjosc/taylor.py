"""Operating points, Jacobian linearization and the transfer-function quantities k0 and omega0."""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

import numpy as np

from jjosc.circuit import (
    CircuitParams,
    State,
    check_admissible,
    gamma,
    inductance,
)
from jjosc.exceptions import DomainError, ResonanceError
from jjosc.signals import BiasSine
from jjosc.simulation import SimConfig, Trajectory, simulate_linear, simulate_nonlinear
from jjosc.utils.signal_utils import dominant_angular_frequency

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearizedModel:
    """
    First-order model of the circuit about an equilibrium (x_bar1, x_bar2, u_bar).

    Attributes:
        x_bar1 (float): Equilibrium current, -u_bar [A].
        x_bar2 (float): Equilibrium voltage, always 0 [V].
        u_bar (float): Constant input [A].
        A (Tuple[Tuple[float, float], Tuple[float, float]]): [[0, 1/L(x_bar1)], [-1/C0, 0]].
        B (Tuple[float, float]): (0, -1/C0).
        c11 (float): Output row entry dh/dx1 at the equilibrium.
        c12 (float): Output row entry dh/dx2 at the equilibrium, always 0.
        omega0 (float): Natural frequency [rad/s].
        k0 (float): Transfer gain c11 / C0^2.
    """

    x_bar1: float
    x_bar2: float
    u_bar: float
    A: Tuple[Tuple[float, float], Tuple[float, float]]
    B: Tuple[float, float]
    c11: float
    c12: float
    omega0: float
    k0: float


def equilibrium(p: CircuitParams, u_bar: float) -> Tuple[float, float]:
    """
    Equilibrium of the circuit under the constant input u_bar.

    Args:
        p (CircuitParams): Circuit constants.
        u_bar (float): Constant source current [A].

    Returns:
        Tuple[float, float]: (x_bar1, x_bar2) = (-u_bar, 0).

    Raises:
        DomainError: If |u_bar| >= I0.
    """
    try:
        check_admissible(p, u_bar)
    except DomainError as err:
        raise DomainError(f"no admissible equilibrium for u_bar = {u_bar}: {err}") from err
    return -u_bar, 0.0


def natural_frequency(p: CircuitParams, x_bar1: float) -> float:
    """omega0 = (1 - (x_bar1/I0)^2)^(1/4) / sqrt(L0 C0)."""
    check_admissible(p, x_bar1)
    ratio = x_bar1 / p.I0
    return (1.0 - ratio * ratio) ** 0.25 / math.sqrt(p.L0 * p.C0)


def linearize(p: CircuitParams, u_bar: float) -> LinearizedModel:
    """
    Jacobian linearization at the equilibrium for u_bar.

    The df1/dx1 entry vanishes because it carries the factor x_bar2 = 0, so A has a zero
    diagonal even though L depends on x1.

    Args:
        p (CircuitParams): Circuit constants.
        u_bar (float): Constant source current [A].

    Returns:
        LinearizedModel: The filled model.

    Raises:
        DomainError: If |u_bar| >= I0.
    """
    x_bar1, x_bar2 = equilibrium(p, u_bar)
    L = inductance(p, x_bar1)
    c11 = L * x_bar1 * (gamma(p) * L * L * x_bar1 * x_bar1 + 1.0)
    return LinearizedModel(
        x_bar1=x_bar1,
        x_bar2=x_bar2,
        u_bar=u_bar,
        A=((0.0, 1.0 / L), (-1.0 / p.C0, 0.0)),
        B=(0.0, -1.0 / p.C0),
        c11=c11,
        c12=0.0,
        omega0=natural_frequency(p, x_bar1),
        k0=c11 / p.C0**2,
    )


def natural_frequency_curve(
    p: CircuitParams, x_bar1_grid: Iterable[float]
) -> List[Tuple[float, float]]:
    """
    omega0 as a function of the operating point.

    Args:
        p (CircuitParams): Circuit constants.
        x_bar1_grid (Iterable[float]): Equilibrium currents.

    Returns:
        List[Tuple[float, float]]: (x_bar1, omega0) pairs in grid order.

    Raises:
        DomainError: If any grid point has |x_bar1| >= I0.
    """
    return [(float(x), natural_frequency(p, float(x))) for x in x_bar1_grid]


def linearized_outputs(
    m: LinearizedModel, p: CircuitParams, z: Tuple[float, float]
) -> Tuple[float, float]:
    """
    Outputs of the linearized circuit.

    y0 is the first-order Taylor term of y; y_l is the energy of the deviation state with
    the inductance frozen at L(x_bar1), so z1 is unrestricted.

    Args:
        m (LinearizedModel): Linearized model.
        p (CircuitParams): Circuit constants.
        z (Tuple[float, float]): Deviation state (z1, z2).

    Returns:
        Tuple[float, float]: (y0, y_l).
    """
    z1, z2 = z
    L_bar = 1.0 / m.A[0][1]
    y0 = m.c11 * z1 + m.c12 * z2
    y_l = 0.5 * L_bar * z1 * z1 + 0.5 * p.C0 * z2 * z2
    return y0, y_l


def magnitude_response(m: LinearizedModel, omega: float) -> float:
    """
    |T(j omega)| = |k0| / |omega0^2 - omega^2| of the undamped second-order model.

    Args:
        m (LinearizedModel): Linearized model.
        omega (float): Angular frequency >= 0 [rad/s].

    Returns:
        float: Transfer magnitude.

    Raises:
        ValueError: If omega is negative.
        ResonanceError: At omega = omega0.
    """
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega}")
    denominator = abs(m.omega0**2 - omega**2)
    if denominator <= 1e-12 * m.omega0**2:
        raise ResonanceError(f"undamped pole at omega0 = {m.omega0:.9g} rad/s")
    return abs(m.k0) / denominator


def frequency_response(
    m: LinearizedModel, omegas: Iterable[float]
) -> List[Tuple[float, float]]:
    """Magnitude response over a grid, leaving out samples that fall on the resonance."""
    response = []
    for omega in omegas:
        try:
            response.append((float(omega), magnitude_response(m, float(omega))))
        except ResonanceError:
            logger.info("skipping resonance sample at omega = %.9g", omega)
    return response


@dataclass(frozen=True)
class TaylorComparison:
    """
    Nonlinear and linearized responses to the same drive, sample for sample.

    Attributes:
        model (LinearizedModel): The model for the drive's bias.
        nonlinear (Trajectory): Nonlinear plant from x0.
        linear (Trajectory): Deviation state from z0 = x0 - x_bar; y holds y0.
        y_l (np.ndarray): Frozen-inductance energy of the deviation state.
        max_state_error (float): max |x1 - (x_bar1 + z1)|.
        omega_nonlinear (Optional[float]): Measured frequency of x1.
        omega_linear (Optional[float]): Measured frequency of z1.
    """

    model: LinearizedModel
    nonlinear: Trajectory
    linear: Trajectory
    y_l: np.ndarray
    max_state_error: float
    omega_nonlinear: Optional[float]
    omega_linear: Optional[float]

    @property
    def y0(self) -> np.ndarray:
        return self.linear.y


def taylor_compare(p: CircuitParams, cfg: SimConfig, drive: BiasSine) -> TaylorComparison:
    """
    Run the nonlinear circuit and its linearization at the drive's bias side by side.

    The linear system starts from the same offset from equilibrium and sees the same
    drive deviation u(t) - u_bar.

    Args:
        p (CircuitParams): Circuit constants.
        cfg (SimConfig): Sampling and the nonlinear initial state.
        drive (BiasSine): Input whose bias a0 selects the operating point.

    Returns:
        TaylorComparison: Both trajectories, the three outputs and the error and frequency measures.

    Raises:
        DomainError: If the operating point is not admissible.
        TrajectoryTruncatedError: If the nonlinear run leaves the admissible region.
    """
    m = linearize(p, drive.a0)
    nonlinear = simulate_nonlinear(p, cfg, drive)

    z0 = State(cfg.x0.x1 - m.x_bar1, cfg.x0.x2 - m.x_bar2)
    linear = simulate_linear(m.A, m.B, replace(cfg, x0=z0), drive.deviation())
    outputs = np.array(
        [linearized_outputs(m, p, (z1, z2)) for z1, z2 in zip(linear.x1, linear.x2)]
    )
    linear = replace(linear, y=outputs[:, 0])

    error = float(np.max(np.abs(nonlinear.x1 - (m.x_bar1 + linear.x1))))
    comparison = TaylorComparison(
        model=m,
        nonlinear=nonlinear,
        linear=linear,
        y_l=outputs[:, 1],
        max_state_error=error,
        omega_nonlinear=dominant_angular_frequency(nonlinear.t, nonlinear.x1),
        omega_linear=dominant_angular_frequency(linear.t, linear.x1),
    )
    logger.info(
        "u_bar=%.6g omega0=%.9g max|x1 - (x_bar1 + z1)|=%.6g",
        drive.a0,
        m.omega0,
        error,
    )
    return comparison
