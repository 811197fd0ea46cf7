import bisect
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np


@dataclass(frozen=True)
class BiasSine:
    """
    Constant bias plus a sinusoid: u(t) = a0 + a1 sin(omega t).

    With a1 = 0 this is the constant operating-point input u_bar = a0.

    Attributes:
        a0 (float): Bias [A].
        a1 (float): Sine amplitude [A].
        omega (float): Angular frequency [rad/s].
    """

    a0: float
    a1: float = 0.0
    omega: float = 0.0

    def __call__(self, t: float) -> float:
        if self.a1 == 0.0:
            return self.a0
        return self.a0 + self.a1 * math.sin(self.omega * t)

    def deviation(self) -> "BiasSine":
        """The same signal with its bias removed, u(t) - a0."""
        return BiasSine(0.0, self.a1, self.omega)

    def sample(self, n: int, dt: float) -> np.ndarray:
        """Evaluate the signal at t_k = k dt for k = 0..n-1."""
        return np.array([self(k * dt) for k in range(n)])


@dataclass(frozen=True)
class PiecewiseConstant:
    """
    Stepped signal holding `levels[i]` from `times[i]` until the next breakpoint.

    Attributes:
        times (Tuple[float, ...]): Strictly increasing segment start times, the first at 0.
        levels (Tuple[float, ...]): Value held on each segment.
    """

    times: Tuple[float, ...]
    levels: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if not self.times:
            raise ValueError("piecewise-constant signal needs at least one segment")
        if len(self.times) != len(self.levels):
            raise ValueError(
                f"got {len(self.times)} breakpoints but {len(self.levels)} levels"
            )
        if self.times[0] != 0.0:
            raise ValueError("first breakpoint must be at t = 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def from_breakpoints(
        cls, breakpoints: Sequence[Tuple[float, float]]
    ) -> "PiecewiseConstant":
        """Build from an ordered list of (t_start, level) pairs."""
        return cls(
            tuple(t for t, _ in breakpoints), tuple(level for _, level in breakpoints)
        )

    def __call__(self, t: float) -> float:
        index = bisect.bisect_right(self.times, t) - 1
        return self.levels[max(index, 0)]

    def sample(self, n: int, dt: float) -> np.ndarray:
        """Evaluate the signal at t_k = k dt for k = 0..n-1."""
        return np.array([self(k * dt) for k in range(n)])


DriveSignal = Union[BiasSine, PiecewiseConstant]
