import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from jjosc.circuit import CircuitParams, State, check_admissible, dynamics, output_energy
from jjosc.exceptions import CircuitError, DomainError, TrajectoryTruncatedError
from jjosc.signals import DriveSignal
from jjosc.utils.constants import DEFAULT_DT, DEFAULT_SIM_SAMPLES

logger = logging.getLogger(__name__)

Derivative = Callable[[float, float], Tuple[float, float]]
StateFeedback = Callable[[float, float, float], float]


@dataclass(frozen=True)
class SimConfig:
    """
    Fixed-step integration settings.

    Attributes:
        dt (float): Step and sampling period [s].
        n_samples (int): Number of steps; trajectories hold n_samples + 1 samples.
        x0 (State): Initial condition.
    """

    dt: float = DEFAULT_DT
    n_samples: int = DEFAULT_SIM_SAMPLES
    x0: State = field(default_factory=lambda: State(0.0, 0.0))

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError(f"n_samples must be an integer >= 1, got {self.n_samples}")
        object.__setattr__(self, "x0", State(float(self.x0[0]), float(self.x0[1])))


@dataclass(frozen=True)
class Trajectory:
    """
    Sampled simulation record. All arrays have the same length.

    For linear simulations x1/x2 hold the deviation state (z1, z2) and y is NaN until
    the caller fills in an output.

    Attributes:
        t (np.ndarray): Sample times, t[k] = k * dt.
        x1 (np.ndarray): Inductor current (or z1).
        x2 (np.ndarray): Capacitor voltage (or z2).
        u (np.ndarray): Source current applied from sample k.
        y (np.ndarray): Output at each sample.
        v (Optional[np.ndarray]): Reference fed to the controller, closed loop only.
    """

    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    u: np.ndarray
    y: np.ndarray
    v: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.t)

    def columns(self) -> Dict[str, np.ndarray]:
        """Named columns in export order."""
        cols = {"t": self.t, "x1": self.x1, "x2": self.x2, "u": self.u, "y": self.y}
        if self.v is not None:
            cols["v"] = self.v
        return cols


def rk4_step(deriv: Derivative, x1: float, x2: float, dt: float) -> Tuple[float, float]:
    """
    Advance a two-state system by one classical fourth-order Runge-Kutta step.

    Args:
        deriv (Derivative): Function (x1, x2) -> (dx1/dt, dx2/dt).
        x1 (float): First state component.
        x2 (float): Second state component.
        dt (float): Step size.

    Returns:
        Tuple[float, float]: The state after dt.
    """
    a1, b1 = deriv(x1, x2)
    a2, b2 = deriv(x1 + 0.5 * dt * a1, x2 + 0.5 * dt * b1)
    a3, b3 = deriv(x1 + 0.5 * dt * a2, x2 + 0.5 * dt * b2)
    a4, b4 = deriv(x1 + dt * a3, x2 + dt * b3)
    return (
        x1 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        x2 + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )


class _Recorder:
    def __init__(self, dt: float, closed_loop: bool):
        self.dt = dt
        self.closed_loop = closed_loop
        self.x1: List[float] = []
        self.x2: List[float] = []
        self.u: List[float] = []
        self.y: List[float] = []
        self.v: List[float] = []

    def freeze(self, y: Optional[Sequence[float]] = None) -> Trajectory:
        # only samples with a recorded input are complete
        n = len(self.u)
        return Trajectory(
            t=np.arange(n) * self.dt,
            x1=np.array(self.x1[:n]),
            x2=np.array(self.x2[:n]),
            u=np.array(self.u),
            y=np.array(self.y[:n]) if y is None else np.asarray(y, dtype=float)[:n],
            v=np.array(self.v[:n]) if self.closed_loop else None,
        )


def simulate_nonlinear(
    p: CircuitParams,
    cfg: SimConfig,
    drive: DriveSignal,
    controller: Optional[StateFeedback] = None,
    continuous_feedback: bool = False,
) -> Trajectory:
    """
    Integrate the nonlinear circuit with RK4 at the sampling period.

    Without a controller, `drive` is the source current u(t). With one, `drive` is the
    external reference v(t) and u = controller(x1, x2, v(t_k)). The input is sampled at
    the start of each step and held through the RK4 stages, unless `continuous_feedback`
    is set, in which case the controller is re-evaluated at every stage with v held.

    Args:
        p (CircuitParams): Circuit constants.
        cfg (SimConfig): Step, sample count and initial state.
        drive (DriveSignal): Input or reference signal.
        controller (Optional[StateFeedback]): Feedback law (x1, x2, v) -> u.
        continuous_feedback (bool): Evaluate the controller inside the RK4 stages.

    Returns:
        Trajectory: n_samples + 1 samples of t, x1, x2, u, y (and v in closed loop).

    Raises:
        DomainError: If x0 is not admissible.
        TrajectoryTruncatedError: If |x1| reaches I0 during integration; carries the
            samples produced so far.
        CircuitError: Any other circuit error from the controller, with the partial
            trajectory attached.
    """
    check_admissible(p, cfg.x0.x1)
    dt = cfg.dt
    rec = _Recorder(dt, controller is not None)
    x1, x2 = cfg.x0
    rec.x1.append(x1)
    rec.x2.append(x2)

    for k in range(cfg.n_samples + 1):
        try:
            t = k * dt
            if controller is None:
                u = drive(t)
            else:
                v = drive(t)
                u = controller(x1, x2, v)
                rec.v.append(v)
            rec.y.append(output_energy(p, State(x1, x2)))
            rec.u.append(u)
            if k == cfg.n_samples:
                break

            if continuous_feedback and controller is not None:

                def deriv(a: float, b: float) -> Tuple[float, float]:
                    return dynamics(p, State(a, b), controller(a, b, v))

            else:

                def deriv(a: float, b: float) -> Tuple[float, float]:
                    return dynamics(p, State(a, b), u)

            x1, x2 = rk4_step(deriv, x1, x2, dt)
            check_admissible(p, x1)
        except DomainError as err:
            partial = rec.freeze()
            logger.info("trajectory truncated after %d samples: %s", len(partial), err)
            raise TrajectoryTruncatedError(
                f"state left the admissible region after t = {(len(partial) - 1) * dt:.4g} s: {err}",
                trajectory=partial,
            ) from err
        except CircuitError as err:
            err.trajectory = rec.freeze()
            raise
        rec.x1.append(x1)
        rec.x2.append(x2)

    return rec.freeze()


def simulate_linear(
    A: Sequence[Sequence[float]],
    B: Sequence[float],
    cfg: SimConfig,
    drive: DriveSignal,
) -> Trajectory:
    """
    Integrate dz/dt = A z + B u with the same RK4 / zero-order-hold scheme.

    Args:
        A (Sequence[Sequence[float]]): 2x2 state matrix.
        B (Sequence[float]): Input vector of length 2.
        cfg (SimConfig): Step, sample count and initial deviation state z0 (as x0).
        drive (DriveSignal): Input u(t) applied to the linear system.

    Returns:
        Trajectory: States in x1/x2, y filled with NaN for the caller to replace.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != (2, 2) or B.shape != (2,):
        raise ValueError(f"expected A 2x2 and B of length 2, got {A.shape} and {B.shape}")
    a00, a01, a10, a11 = (float(v) for v in A.ravel())
    b0, b1 = float(B[0]), float(B[1])

    dt = cfg.dt
    rec = _Recorder(dt, closed_loop=False)
    z1, z2 = cfg.x0
    rec.x1.append(z1)
    rec.x2.append(z2)
    for k in range(cfg.n_samples + 1):
        u = drive(k * dt)
        rec.u.append(u)
        if k == cfg.n_samples:
            break

        def deriv(a: float, b: float) -> Tuple[float, float]:
            return a00 * a + a01 * b + b0 * u, a10 * a + a11 * b + b1 * u

        z1, z2 = rk4_step(deriv, z1, z2, dt)
        rec.x1.append(z1)
        rec.x2.append(z2)

    return rec.freeze(y=np.full(cfg.n_samples + 1, np.nan))
