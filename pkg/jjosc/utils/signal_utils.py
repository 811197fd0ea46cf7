import math
from typing import Optional

import numpy as np


def upward_crossings(t: np.ndarray, signal: np.ndarray, level: float) -> np.ndarray:
    """
    Times at which `signal` crosses `level` from below, linearly interpolated.

    Args:
        t (np.ndarray): Sample times.
        signal (np.ndarray): Samples, same length as t.
        level (float): Threshold.

    Returns:
        np.ndarray: Crossing times in increasing order.
    """
    s = np.asarray(signal, dtype=float) - level
    t = np.asarray(t, dtype=float)
    idx = np.nonzero((s[:-1] < 0.0) & (s[1:] >= 0.0))[0]
    frac = -s[idx] / (s[idx + 1] - s[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def dominant_angular_frequency(
    t: np.ndarray, signal: np.ndarray, discard_fraction: float = 0.25
) -> Optional[float]:
    """
    Estimate the oscillation frequency of a near-periodic signal from zero crossings.

    The first `discard_fraction` of the record is dropped, the mean of the rest is used
    as the crossing level, and the period is the average spacing between upward
    crossings.

    Args:
        t (np.ndarray): Sample times.
        signal (np.ndarray): Samples.
        discard_fraction (float): Leading share of the record to ignore.

    Returns:
        Optional[float]: Angular frequency [rad/s], or None with fewer than two crossings.
    """
    start = int(len(t) * discard_fraction)
    window_t = np.asarray(t, dtype=float)[start:]
    window = np.asarray(signal, dtype=float)[start:]
    if len(window) < 3:
        return None
    crossings = upward_crossings(window_t, window, float(np.mean(window)))
    if len(crossings) < 2:
        return None
    period = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
    return 2.0 * math.pi / period
