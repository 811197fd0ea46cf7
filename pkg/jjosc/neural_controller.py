"""
NN(3, N, 1) feedback u = sum_i c_i tanh(w_i1 x1 + w_i2 x2 + w_i3 v).

The network has no bias terms, so the origin of its input space maps to u = 0.
"""

import os
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence, Union

import numpy as np

from jjosc.utils.constants import DEFAULT_HIDDEN

N_INPUTS = 3
TABLE1_RESOURCE = "table1.txt"


@dataclass(frozen=True)
class MLPParams:
    """
    Weights of the single-hidden-layer controller.

    Attributes:
        W (np.ndarray): Input weights, shape (n_hidden, 3); columns act on (x1, x2, v).
        c (np.ndarray): Output weights, shape (n_hidden,).
    """

    W: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        c = np.array(self.c, dtype=float)
        if W.ndim != 2 or W.shape[1] != N_INPUTS:
            raise ValueError(f"W must have shape (n_hidden, {N_INPUTS}), got {W.shape}")
        if c.shape != (W.shape[0],):
            raise ValueError(f"c must have {W.shape[0]} entries, got shape {c.shape}")
        W.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "c", c)

    @property
    def n_hidden(self) -> int:
        return self.W.shape[0]

    @property
    def n_params(self) -> int:
        return self.W.size + self.c.size


def encode(params: MLPParams) -> np.ndarray:
    """Flatten to (w_11, w_12, w_13, w_21, ..., w_N3, c_1, ..., c_N)."""
    return np.concatenate([params.W.ravel(), params.c])


def decode(vector: Sequence[float]) -> MLPParams:
    """
    Rebuild MLPParams from its flat encoding; the hidden width is len(vector) / 4.

    Raises:
        ValueError: If the length is not a positive multiple of 4.
    """
    vector = np.asarray(vector, dtype=float)
    n_hidden, rest = divmod(vector.size, N_INPUTS + 1)
    if vector.ndim != 1 or n_hidden == 0 or rest:
        raise ValueError(
            f"flat NN vector must have 4 * n_hidden entries, got {vector.size}"
        )
    split = n_hidden * N_INPUTS
    return MLPParams(vector[:split].reshape(n_hidden, N_INPUTS), vector[split:])


def forward(params: MLPParams, x1: float, x2: float, v: float) -> float:
    """
    Evaluate the controller output.

    Args:
        params (MLPParams): Network weights.
        x1 (float): Inductor current [A].
        x2 (float): Capacitor voltage [V].
        v (float): External input.

    Returns:
        float: u = sum_i c_i tanh(w_i . (x1, x2, v)).
    """
    W = params.W
    hidden = np.tanh(W[:, 0] * x1 + W[:, 1] * x2 + W[:, 2] * v)
    return float(np.sum(params.c * hidden))


def batch_forward(
    W: np.ndarray, c: np.ndarray, x1: np.ndarray, x2: np.ndarray, v: float
) -> np.ndarray:
    """
    Evaluate K networks at K states at once.

    Args:
        W (np.ndarray): Input weights, shape (K, N, 3).
        c (np.ndarray): Output weights, shape (K, N).
        x1 (np.ndarray): Currents, shape (K,).
        x2 (np.ndarray): Voltages, shape (K,).
        v (float): Shared external input.

    Returns:
        np.ndarray: Controller outputs, shape (K,).
    """
    pre = W[:, :, 0] * x1[:, None] + W[:, :, 1] * x2[:, None] + W[:, :, 2] * v
    return np.sum(c * np.tanh(pre), axis=1)


def saturate(u: Union[float, np.ndarray], u_max: float) -> Union[float, np.ndarray]:
    """
    Clamp the control to [-u_max, u_max].

    Raises:
        ValueError: If u_max is not positive.
    """
    if not u_max > 0:
        raise ValueError(f"u_max must be positive, got {u_max}")
    if isinstance(u, np.ndarray):
        return np.clip(u, -u_max, u_max)
    return min(max(u, -u_max), u_max)


def random_params(
    n_hidden: int = DEFAULT_HIDDEN, rng: Optional[np.random.Generator] = None
) -> MLPParams:
    """Draw every weight uniformly from [-1, 1]."""
    rng = rng if rng is not None else np.random.default_rng()
    return decode(rng.uniform(-1.0, 1.0, size=n_hidden * (N_INPUTS + 1)))


def _format_weight(value: float) -> str:
    return np.format_float_positional(value, unique=True, trim="-")


def save_vector(vector: Sequence[float], filepath: str) -> None:
    """
    Write a flat parameter vector, one decimal value per line.

    Args:
        vector (Sequence[float]): Values in their documented order.
        filepath (str): Destination path; parent directories are created.
    """
    os.makedirs(
        os.path.dirname(filepath) if os.path.dirname(filepath) else ".", exist_ok=True
    )
    with open(filepath, "w", encoding="utf-8", newline="\n") as fh:
        for value in vector:
            fh.write(_format_weight(float(value)) + "\n")


def parse_vector(text: str) -> np.ndarray:
    """Parse one value per line; blank lines and '#' comments are ignored."""
    values = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ValueError(f"line {number}: not a number: {line!r}")
    return np.array(values)


def load_vector(filepath: str) -> np.ndarray:
    """
    Read a parameter file written by save_vector.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If a line is not a number.
    """
    with open(filepath, "r", encoding="utf-8") as fh:
        return parse_vector(fh.read())


def save_params(params: MLPParams, filepath: str) -> None:
    save_vector(encode(params), filepath)


def load_params(filepath: str) -> MLPParams:
    return decode(load_vector(filepath))


def load_table1() -> MLPParams:
    """
    The published NN(3, 8, 1) weights shipped with the package.

    Returns:
        MLPParams: 8 x 3 input weights and 8 output weights.
    """
    text = resources.files("jjosc.data").joinpath(TABLE1_RESOURCE).read_text("utf-8")
    return decode(parse_vector(text))
