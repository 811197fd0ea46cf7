"""
Closed-loop training of approximate linearizing controllers.

Both controller families are tuned to make the circuit output y track the reference
model dy_d/dt + tau y_d = v, by minimizing

    J = sum_{k=0..NS} (y_d[k] - y[k])^2

with a seeded derivative-free hill climber: Gaussian perturbations of the flat parameter
vector are accepted only when J strictly decreases, and the perturbation size halves
after a run of rejections.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from jjosc.circuit import CircuitParams, State, admissible_limit, output_energy
from jjosc.exceptions import TrajectoryTruncatedError
from jjosc.feedback_linearization import ReferenceModel, output_rate
from jjosc.neural_controller import (
    batch_forward,
    decode,
    forward,
    load_vector,
    saturate,
    save_vector,
)
from jjosc.signals import DriveSignal, PiecewiseConstant
from jjosc.simulation import SimConfig, Trajectory, simulate_nonlinear
from jjosc.utils.constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_DT,
    DEFAULT_HIDDEN,
    DEFAULT_MAX_EVALS,
    DEFAULT_SEED,
    DEFAULT_STEP_SCALE,
    DEFAULT_TAU,
    DEFAULT_TRAIN_SAMPLES,
    LOG_EVERY_EVALS,
    PENALTY_FACTOR,
    REFERENCE_GAINS,
    REFERENCE_STEP_LEVELS,
    REFERENCE_STEP_TIMES,
    REJECTIONS_BEFORE_HALVING,
    U_MAX_FRACTION,
)

logger = logging.getLogger(__name__)

Controller = Callable[[float, float, float], float]
BatchController = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class FeedbackGains:
    """
    Linear state feedback u = k1 x1 + k2 x2 + k3 v.

    Attributes:
        k1 (float): Gain on the inductor current.
        k2 (float): Gain on the capacitor voltage.
        k3 (float): Gain on the external input.
    """

    k1: float
    k2: float
    k3: float

    def __post_init__(self):
        if not all(math.isfinite(k) for k in (self.k1, self.k2, self.k3)):
            raise ValueError(f"gains must be finite, got {(self.k1, self.k2, self.k3)}")

    def encode(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3])

    @classmethod
    def decode(cls, vector: Sequence[float]) -> "FeedbackGains":
        if len(vector) != 3:
            raise ValueError(f"gain vector must have 3 entries, got {len(vector)}")
        return cls(*(float(k) for k in vector))


def reference_gains() -> FeedbackGains:
    """The published trained gains (-0.6176, 0.0410, 1.8195)."""
    return FeedbackGains(*REFERENCE_GAINS)


def save_gains(g: FeedbackGains, filepath: str) -> None:
    """Write k1, k2, k3 one per line."""
    save_vector(g.encode(), filepath)


def load_gains(filepath: str) -> FeedbackGains:
    return FeedbackGains.decode(load_vector(filepath))


def evaluate_gains(g: FeedbackGains, x1: float, x2: float, v: float) -> float:
    """u = k1 x1 + k2 x2 + k3 v, unsaturated."""
    return g.k1 * x1 + g.k2 * x2 + g.k3 * v


def linear_residual(
    p: CircuitParams, g: FeedbackGains, s: State, v: float, tau: float
) -> float:
    """
    dy/dt + tau y - v under linear feedback; zero only where the feedback happens to
    cancel the gamma x1^3 x2 L^2 term.
    """
    u = evaluate_gains(g, s.x1, s.x2, v)
    return output_rate(p, s, u) + tau * output_energy(p, s) - v


def default_reference_signal() -> PiecewiseConstant:
    return PiecewiseConstant(REFERENCE_STEP_TIMES, REFERENCE_STEP_LEVELS)


@dataclass(frozen=True)
class TrainConfig:
    """
    Rollout and search settings.

    Attributes:
        dt (float): Sampling period [s].
        n_samples (int): Horizon NS; J sums NS + 1 samples.
        tau (float): Reference model rate [1/s].
        v_signal (DriveSignal): External input v(t).
        x0 (State): Initial state of every rollout.
        seed (int): Seed of the search's random stream.
        max_evals (int): Objective evaluations allowed, the initial point included.
        step_scale (float): Initial perturbation standard deviation.
        u_max (Optional[float]): Saturation bound; None means 0.95 I0.
        batch_size (int): Largest number of candidates rolled out together.
    """

    dt: float = DEFAULT_DT
    n_samples: int = DEFAULT_TRAIN_SAMPLES
    tau: float = DEFAULT_TAU
    v_signal: DriveSignal = field(default_factory=default_reference_signal)
    x0: State = field(default_factory=lambda: State(0.0, 0.0))
    seed: int = DEFAULT_SEED
    max_evals: int = DEFAULT_MAX_EVALS
    step_scale: float = DEFAULT_STEP_SCALE
    u_max: Optional[float] = None
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be >= 1, got {self.max_evals}")
        if not self.step_scale > 0:
            raise ValueError(f"step_scale must be positive, got {self.step_scale}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.u_max is not None and not self.u_max > 0:
            raise ValueError(f"u_max must be positive, got {self.u_max}")
        object.__setattr__(self, "x0", State(float(self.x0[0]), float(self.x0[1])))

    def sim_config(self) -> SimConfig:
        return SimConfig(dt=self.dt, n_samples=self.n_samples, x0=self.x0)

    def resolved_u_max(self, p: CircuitParams) -> float:
        return self.u_max if self.u_max is not None else U_MAX_FRACTION * p.I0


class ControllerFamily(ABC):
    """A trainable controller structure with a flat parameter vector."""

    name: str = ""

    @property
    @abstractmethod
    def n_params(self) -> int:
        """Length of the flat parameter vector."""

    @abstractmethod
    def controller(self, theta: Sequence[float]) -> Controller:
        """Scalar feedback law (x1, x2, v) -> u for one parameter vector."""

    @abstractmethod
    def batch_controller(self, thetas: np.ndarray) -> BatchController:
        """Feedback laws for K parameter vectors evaluated on K states at once."""


class NeuralFamily(ControllerFamily):
    """NN(3, N, 1) controllers."""

    name = "nn"

    def __init__(self, n_hidden: int = DEFAULT_HIDDEN):
        if n_hidden < 1:
            raise ValueError(f"n_hidden must be >= 1, got {n_hidden}")
        self.n_hidden = n_hidden

    @property
    def n_params(self) -> int:
        return 4 * self.n_hidden

    def controller(self, theta: Sequence[float]) -> Controller:
        params = decode(theta)
        return lambda x1, x2, v: forward(params, x1, x2, v)

    def batch_controller(self, thetas: np.ndarray) -> BatchController:
        split = 3 * self.n_hidden
        W = thetas[:, :split].reshape(len(thetas), self.n_hidden, 3)
        c = thetas[:, split:]
        return lambda x1, x2, v: batch_forward(W, c, x1, x2, v)


class LinearFamily(ControllerFamily):
    """Linear state feedback controllers."""

    name = "linear"

    @property
    def n_params(self) -> int:
        return 3

    def controller(self, theta: Sequence[float]) -> Controller:
        gains = FeedbackGains.decode(theta)
        return lambda x1, x2, v: evaluate_gains(gains, x1, x2, v)

    def batch_controller(self, thetas: np.ndarray) -> BatchController:
        k1, k2, k3 = thetas[:, 0], thetas[:, 1], thetas[:, 2]
        return lambda x1, x2, v: k1 * x1 + k2 * x2 + k3 * v


def reference_output(p: CircuitParams, cfg: TrainConfig) -> np.ndarray:
    """y_d over the horizon, starting from y(x0)."""
    v = cfg.v_signal.sample(cfg.n_samples + 1, cfg.dt)
    return ReferenceModel(cfg.tau).response(v, cfg.dt, output_energy(p, cfg.x0))


def _penalty_per_step(y_d: np.ndarray) -> float:
    return PENALTY_FACTOR * float(np.max(np.abs(y_d))) ** 2


def closed_loop(
    p: CircuitParams,
    cfg: TrainConfig,
    controller: Controller,
    y_d: Optional[np.ndarray] = None,
) -> Tuple[Trajectory, np.ndarray]:
    """
    Run one saturated closed loop and its reference.

    A y_d already computed with reference_output for the same configuration is
    returned as is.

    Returns:
        Tuple[Trajectory, np.ndarray]: The trajectory and y_d.

    Raises:
        TrajectoryTruncatedError: If |x1| reaches I0.
    """
    u_max = cfg.resolved_u_max(p)

    def bounded(x1: float, x2: float, v: float) -> float:
        return saturate(controller(x1, x2, v), u_max)

    if y_d is None:
        y_d = reference_output(p, cfg)
    traj = simulate_nonlinear(p, cfg.sim_config(), cfg.v_signal, bounded)
    return traj, y_d


def performance_index(p: CircuitParams, cfg: TrainConfig, controller: Controller) -> float:
    """
    Tracking index J of a controller under the training configuration.

    The control is saturated to u_max and held over each step. A run that leaves the
    admissible region scores the J accumulated so far plus 10 max(y_d)^2 per missing
    sample.

    Args:
        p (CircuitParams): Circuit constants.
        cfg (TrainConfig): Horizon, reference and saturation.
        controller (Controller): Feedback law (x1, x2, v) -> u before saturation.

    Returns:
        float: J.
    """
    y_d = reference_output(p, cfg)
    try:
        traj, _ = closed_loop(p, cfg, controller, y_d)
    except TrajectoryTruncatedError as err:
        partial = err.trajectory
        missed = cfg.n_samples + 1 - len(partial)
        tracked = float(np.sum((y_d[: len(partial)] - partial.y) ** 2))
        return tracked + _penalty_per_step(y_d) * missed
    return float(np.sum((y_d - traj.y) ** 2))


def rollout_batch(
    p: CircuitParams, cfg: TrainConfig, family: ControllerFamily, thetas: np.ndarray
) -> np.ndarray:
    """
    J for K parameter vectors, simulated side by side.

    Same integration, saturation and truncation penalty as performance_index, with one
    state per candidate. Candidates that leave the admissible region stop contributing
    tracking error and are charged for their missing samples.

    Args:
        p (CircuitParams): Circuit constants.
        cfg (TrainConfig): Horizon, reference and saturation.
        family (ControllerFamily): Structure the vectors parameterize.
        thetas (np.ndarray): Shape (K, family.n_params).

    Returns:
        np.ndarray: J per candidate, shape (K,).
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != family.n_params:
        raise ValueError(
            f"{family.name} needs {family.n_params} parameters, got {thetas.shape[1]}"
        )
    control = family.batch_controller(thetas)
    n, dt = cfg.n_samples, cfg.dt
    y_d = reference_output(p, cfg)
    v = cfg.v_signal.sample(n + 1, dt)
    u_max = cfg.resolved_u_max(p)
    limit = admissible_limit(p)
    I0, L0, C0 = p.I0, p.L0, p.C0

    def inductance(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        bad = ~(np.abs(a) < limit)
        ratio = np.where(bad, 0.0, a) / I0
        return L0 / np.sqrt(1.0 - ratio * ratio), bad

    def deriv(a, b, u):
        L, bad = inductance(a)
        return b / L, -(a + u) / C0, bad

    K = len(thetas)
    x1 = np.full(K, cfg.x0.x1)
    x2 = np.full(K, cfg.x0.x2)
    alive = np.ones(K, dtype=bool)
    J = np.zeros(K)
    missed = np.zeros(K)

    for k in range(n + 1):
        L, _ = inductance(x1)
        y = 0.5 * L * x1 * x1 + 0.5 * C0 * x2 * x2
        err = y_d[k] - y
        J += np.where(alive, err * err, 0.0)
        if k == n:
            break

        u = np.clip(control(x1, x2, v[k]), -u_max, u_max)
        a1, b1, bad1 = deriv(x1, x2, u)
        a2, b2, bad2 = deriv(x1 + 0.5 * dt * a1, x2 + 0.5 * dt * b1, u)
        a3, b3, bad3 = deriv(x1 + 0.5 * dt * a2, x2 + 0.5 * dt * b2, u)
        a4, b4, bad4 = deriv(x1 + dt * a3, x2 + dt * b3, u)
        nx1 = x1 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        nx2 = x2 + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)

        bad = bad1 | bad2 | bad3 | bad4 | ~(np.abs(nx1) < limit)
        newly_lost = alive & bad
        missed[newly_lost] = n - k
        alive &= ~bad
        if not alive.any():
            break
        x1 = np.where(alive, nx1, 0.0)
        x2 = np.where(alive, nx2, 0.0)

    return J + _penalty_per_step(y_d) * missed


@dataclass(frozen=True)
class TrainingRecord:
    """One objective evaluation of the search."""

    eval: int
    j_best: float
    j_candidate: float
    accepted: bool


@dataclass(frozen=True)
class TrainingResult:
    """
    Outcome of a training run.

    Attributes:
        params (np.ndarray): Best flat parameter vector found.
        j_best (float): Its performance index.
        history (List[TrainingRecord]): Every evaluation in order, the initial point first.
        step_scale (float): Perturbation size when the budget ran out.
    """

    params: np.ndarray
    j_best: float
    history: List[TrainingRecord]
    step_scale: float

    @property
    def j_initial(self) -> float:
        return self.history[0].j_candidate


def train(
    p: CircuitParams,
    cfg: TrainConfig,
    family: ControllerFamily,
    init: Sequence[float],
) -> TrainingResult:
    """
    Minimize J over the family's parameters by seeded Gaussian hill climbing.

    Candidates best + N(0, step^2 I) are accepted iff J strictly decreases; after
    REJECTIONS_BEFORE_HALVING consecutive rejections the step halves. Candidates are
    drawn and rolled out batch_size at a time, never past the budget or the next
    halving; they are consumed in draw order, and the first acceptance discards the rest
    of its batch without recording it. Running out of budget is not an error.

    Args:
        p (CircuitParams): Circuit constants.
        cfg (TrainConfig): Rollout and search settings.
        family (ControllerFamily): Controller structure.
        init (Sequence[float]): Starting flat parameter vector.

    Returns:
        TrainingResult: Best parameters, best J and the evaluation history.

    Raises:
        ValueError: If init does not match the family.
    """
    best = np.array(init, dtype=float)
    if best.shape != (family.n_params,):
        raise ValueError(
            f"{family.name} needs {family.n_params} parameters, got shape {best.shape}"
        )
    rng = np.random.default_rng(cfg.seed)
    j_best = float(rollout_batch(p, cfg, family, best[None, :])[0])
    history = [TrainingRecord(0, j_best, j_best, True)]
    logger.info("training %s from J = %.6g (seed %d)", family.name, j_best, cfg.seed)

    step = cfg.step_scale
    streak = 0
    evals = 1
    while evals < cfg.max_evals:
        size = min(
            cfg.batch_size,
            cfg.max_evals - evals,
            REJECTIONS_BEFORE_HALVING - streak,
        )
        candidates = best + step * rng.standard_normal((size, family.n_params))
        costs = rollout_batch(p, cfg, family, candidates)
        for candidate, cost in zip(candidates, costs):
            cost = float(cost)
            accepted = cost < j_best
            if accepted:
                best, j_best, streak = candidate.copy(), cost, 0
            else:
                streak += 1
            history.append(TrainingRecord(evals, j_best, cost, accepted))
            evals += 1
            logger.debug("eval %d J=%.6g accepted=%s", evals - 1, cost, accepted)
            if evals % LOG_EVERY_EVALS == 0:
                logger.info("eval %d J_best = %.6g step = %.3g", evals, j_best, step)
            if accepted:
                break
        if streak >= REJECTIONS_BEFORE_HALVING:
            step *= 0.5
            streak = 0
            logger.info("no improvement in %d evaluations, step -> %.3g",
                        REJECTIONS_BEFORE_HALVING, step)

    logger.info("training %s finished: J = %.6g after %d evaluations",
                family.name, j_best, evals)
    return TrainingResult(params=best, j_best=j_best, history=history, step_scale=step)
