"""
Scenario files: TOML documents describing one run of the toolkit.

    mode = "taylor-compare"
    output = "fig2"

    [circuit]
    I0 = 0.2
    kappa = 1.0
    C0 = 0.1

    [sim]
    dt = 0.01
    n_samples = 2000

    [drive]
    kind = "bias-sine"
    a0 = 0.05

Only top-level keys and one level of sections are accepted; unknown sections or keys
are rejected so that typos never fall back to defaults silently.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import tomli

from jjosc.circuit import CircuitParams, State
from jjosc.exceptions import ScenarioError
from jjosc.feedback_linearization import ReferenceModel
from jjosc.neural_controller import encode, load_table1, load_vector, random_params
from jjosc.signals import BiasSine, DriveSignal, PiecewiseConstant
from jjosc.simulation import SimConfig
from jjosc.trainer import (
    ControllerFamily,
    LinearFamily,
    NeuralFamily,
    TrainConfig,
    default_reference_signal,
    reference_gains,
)
from jjosc.utils.constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_DT,
    DEFAULT_HIDDEN,
    DEFAULT_MAX_EVALS,
    DEFAULT_SEED,
    DEFAULT_SIM_SAMPLES,
    DEFAULT_STEP_SCALE,
    DEFAULT_TAU,
    DEFAULT_TRAIN_SAMPLES,
)

logger = logging.getLogger(__name__)

TRAINING_MODES = ("train-nn", "train-linear")
CLOSED_LOOP_MODES = TRAINING_MODES + ("replay",)
MODES = (
    "simulate",
    "taylor-compare",
    "omega0-curve",
    "frequency-response",
    "exact-fl",
) + CLOSED_LOOP_MODES

TABLE1_SOURCE = "table1"
REFERENCE_GAINS_SOURCE = "reference-gains"
RANDOM_SOURCE = "random"

ALLOWED_KEYS: Dict[str, Tuple[str, ...]] = {
    "circuit": ("I0", "kappa", "C0"),
    "sim": ("dt", "n_samples", "x1_0", "x2_0"),
    "drive": ("kind", "a0", "a1", "omega", "times", "levels"),
    "reference": ("tau", "y_d0"),
    "controller": ("source",),
    "train": (
        "seed",
        "max_evals",
        "step_scale",
        "u_max",
        "batch_size",
        "n_hidden",
        "init",
    ),
    "curve": ("x_min", "x_max", "n_points"),
    "sweep": ("u_bar", "omega_min", "omega_max", "n_points"),
}
TOP_LEVEL_KEYS = ("mode", "output")

REQUIRED_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "simulate": ("circuit", "drive"),
    "taylor-compare": ("circuit", "drive"),
    "omega0-curve": ("circuit", "curve"),
    "frequency-response": ("circuit", "sweep"),
    "exact-fl": ("circuit", "drive"),
    "train-nn": ("circuit",),
    "train-linear": ("circuit",),
    "replay": ("circuit", "controller"),
}


@dataclass(frozen=True)
class Scenario:
    """
    A validated scenario with every value resolved.

    Attributes:
        mode (str): One of MODES.
        output (str): Output path prefix as written in the file.
        circuit (CircuitParams): Circuit constants.
        seed (int): Search seed (echoed for every mode).
        path (Optional[str]): File the scenario came from.
        sim (Optional[SimConfig]): Sampling and initial state for simulation modes.
        drive (Optional[DriveSignal]): Source current, or v(t) for closed-loop modes.
        reference (Optional[ReferenceModel]): Target dynamics for exact-fl.
        train (Optional[TrainConfig]): Rollout settings for training and replay.
        family (Optional[ControllerFamily]): Controller structure for training and replay.
        params (Optional[np.ndarray]): Initial (training) or replayed parameter vector.
        grid (Optional[np.ndarray]): x_bar1 grid (omega0-curve) or omega grid
            (frequency-response).
        u_bar (Optional[float]): Operating point of the frequency sweep.
    """

    mode: str
    output: str
    circuit: CircuitParams
    seed: int = DEFAULT_SEED
    path: Optional[str] = None
    sim: Optional[SimConfig] = None
    drive: Optional[DriveSignal] = None
    reference: Optional[ReferenceModel] = None
    train: Optional[TrainConfig] = None
    family: Optional[ControllerFamily] = None
    params: Optional[np.ndarray] = None
    grid: Optional[np.ndarray] = None
    u_bar: Optional[float] = None
    echo: List[Tuple[str, Any]] = field(default_factory=list)


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"[{section}] {key} must be a number, got {value!r}")
    return float(value)


def _integer(section: str, key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"[{section}] {key} must be an integer, got {value!r}")
    return value


def _numbers(section: str, key: str, value: Any) -> Tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ScenarioError(f"[{section}] {key} must be a non-empty array of numbers")
    return tuple(_number(section, key, item) for item in value)


def _required(table: Mapping[str, Any], section: str, key: str) -> Any:
    if key not in table:
        raise ScenarioError(f"[{section}] is missing required key '{key}'")
    return table[key]


def _check_keys(document: Mapping[str, Any]) -> None:
    for name, value in document.items():
        if isinstance(value, dict):
            if name not in ALLOWED_KEYS:
                raise ScenarioError(f"unknown section [{name}]")
            for key in value:
                if key not in ALLOWED_KEYS[name]:
                    raise ScenarioError(f"unknown key '{key}' in [{name}]")
        elif name not in TOP_LEVEL_KEYS:
            raise ScenarioError(f"unknown top-level key '{name}'")


def _parse_circuit(table: Mapping[str, Any]) -> CircuitParams:
    values = {
        key: _number("circuit", key, _required(table, "circuit", key))
        for key in ALLOWED_KEYS["circuit"]
    }
    try:
        return CircuitParams(**values)
    except ValueError as err:
        raise ScenarioError(f"[circuit] {err}") from err


def _parse_sim(table: Mapping[str, Any], default_samples: int) -> SimConfig:
    try:
        return SimConfig(
            dt=_number("sim", "dt", table.get("dt", DEFAULT_DT)),
            n_samples=_integer("sim", "n_samples", table.get("n_samples", default_samples)),
            x0=State(
                _number("sim", "x1_0", table.get("x1_0", 0.0)),
                _number("sim", "x2_0", table.get("x2_0", 0.0)),
            ),
        )
    except ValueError as err:
        if isinstance(err, ScenarioError):
            raise
        raise ScenarioError(f"[sim] {err}") from err


def _parse_drive(table: Mapping[str, Any]) -> DriveSignal:
    kind = _required(table, "drive", "kind")
    if kind == "bias-sine":
        for key in ("times", "levels"):
            if key in table:
                raise ScenarioError(f"[drive] '{key}' does not apply to kind 'bias-sine'")
        return BiasSine(
            a0=_number("drive", "a0", _required(table, "drive", "a0")),
            a1=_number("drive", "a1", table.get("a1", 0.0)),
            omega=_number("drive", "omega", table.get("omega", 0.0)),
        )
    if kind == "piecewise-constant":
        for key in ("a0", "a1", "omega"):
            if key in table:
                raise ScenarioError(
                    f"[drive] '{key}' does not apply to kind 'piecewise-constant'"
                )
        try:
            return PiecewiseConstant(
                _numbers("drive", "times", _required(table, "drive", "times")),
                _numbers("drive", "levels", _required(table, "drive", "levels")),
            )
        except ValueError as err:
            if isinstance(err, ScenarioError):
                raise
            raise ScenarioError(f"[drive] {err}") from err
    raise ScenarioError(
        f"[drive] kind must be 'bias-sine' or 'piecewise-constant', got {kind!r}"
    )


def _parse_grid(table: Mapping[str, Any], section: str, low: str, high: str) -> np.ndarray:
    start = _number(section, low, _required(table, section, low))
    stop = _number(section, high, _required(table, section, high))
    n_points = _integer(section, "n_points", _required(table, section, "n_points"))
    if n_points < 2 or not stop > start:
        raise ScenarioError(
            f"[{section}] needs {low} < {high} and n_points >= 2, "
            f"got {start}, {stop}, {n_points}"
        )
    return np.linspace(start, stop, n_points)


def resolve_parameters(source: Any, base_dir: str) -> Tuple[ControllerFamily, np.ndarray]:
    """
    Turn a controller source into a family and a flat parameter vector.

    Args:
        source: "table1", "reference-gains" or a parameter file path, relative paths
            being taken from base_dir.
        base_dir: Directory of the scenario file.

    Returns:
        Tuple[ControllerFamily, np.ndarray]: The structure and its parameters; three
            values are linear gains, 4N values an NN(3, N, 1).

    Raises:
        ScenarioError: If the file cannot be read or has an unusable length.
    """
    if not isinstance(source, str) or not source:
        raise ScenarioError(f"controller source must be a non-empty string, got {source!r}")
    if source == TABLE1_SOURCE:
        return NeuralFamily(DEFAULT_HIDDEN), encode(load_table1())
    if source == REFERENCE_GAINS_SOURCE:
        return LinearFamily(), reference_gains().encode()

    path = source if os.path.isabs(source) else os.path.join(base_dir, source)
    try:
        vector = load_vector(path)
    except (OSError, ValueError) as err:
        raise ScenarioError(f"cannot read controller parameters from {path}: {err}") from err
    if len(vector) == 3:
        return LinearFamily(), vector
    if len(vector) > 0 and len(vector) % 4 == 0:
        return NeuralFamily(len(vector) // 4), vector
    raise ScenarioError(
        f"{path}: expected 3 gains or 4 * n_hidden weights, got {len(vector)} values"
    )


def _initial_parameters(
    mode: str, table: Mapping[str, Any], seed: int, base_dir: str
) -> Tuple[ControllerFamily, np.ndarray]:
    if mode == "train-nn":
        n_hidden = _integer("train", "n_hidden", table.get("n_hidden", DEFAULT_HIDDEN))
        if n_hidden < 1:
            raise ScenarioError(f"[train] n_hidden must be >= 1, got {n_hidden}")
        family: ControllerFamily = NeuralFamily(n_hidden)
        source = table.get("init", RANDOM_SOURCE)
    else:
        if "n_hidden" in table:
            raise ScenarioError("[train] n_hidden only applies to train-nn")
        family = LinearFamily()
        source = table.get("init", REFERENCE_GAINS_SOURCE)

    if source == RANDOM_SOURCE:
        if isinstance(family, NeuralFamily):
            init_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
            return family, encode(random_params(family.n_hidden, init_rng))
        raise ScenarioError("[train] init = 'random' only applies to train-nn")

    loaded_family, vector = resolve_parameters(source, base_dir)
    if loaded_family.n_params != family.n_params or type(loaded_family) is not type(family):
        raise ScenarioError(
            f"[train] init {source!r} has {len(vector)} values, "
            f"{mode} needs {family.n_params}"
        )
    return family, vector


def parse_scenario(
    document: Mapping[str, Any], base_dir: str = ".", seed: Optional[int] = None
) -> Scenario:
    """
    Validate a decoded scenario document and resolve all of its values.

    Args:
        document: Parsed TOML tables.
        base_dir: Directory against which relative parameter paths resolve.
        seed: Overrides [train] seed when given.

    Returns:
        Scenario: The resolved scenario.

    Raises:
        ScenarioError: On unknown, missing or ill-typed keys, or invalid values.
    """
    _check_keys(document)
    mode = _required(document, "top level", "mode")
    if mode not in MODES:
        raise ScenarioError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    output = document.get("output", mode)
    if not isinstance(output, str) or not output:
        raise ScenarioError(f"output must be a non-empty string, got {output!r}")
    for section in REQUIRED_SECTIONS[mode]:
        if section not in document:
            raise ScenarioError(f"mode {mode} needs a [{section}] section")

    circuit = _parse_circuit(document["circuit"])
    train_table = document.get("train", {})
    if seed is None:
        seed = _integer("train", "seed", train_table.get("seed", DEFAULT_SEED))
    echo: List[Tuple[str, Any]] = [
        ("mode", mode),
        ("I0", circuit.I0),
        ("kappa", circuit.kappa),
        ("C0", circuit.C0),
    ]
    fields: Dict[str, Any] = {}

    if mode in ("omega0-curve", "frequency-response"):
        if mode == "omega0-curve":
            fields["grid"] = _parse_grid(document["curve"], "curve", "x_min", "x_max")
        else:
            sweep = document["sweep"]
            fields["u_bar"] = _number("sweep", "u_bar", _required(sweep, "sweep", "u_bar"))
            fields["grid"] = _parse_grid(sweep, "sweep", "omega_min", "omega_max")
            if fields["grid"][0] < 0:
                raise ScenarioError("[sweep] omega_min must be non-negative")
            echo.append(("u_bar", fields["u_bar"]))
        echo.append(("n_points", len(fields["grid"])))
        return Scenario(
            mode=mode, output=output, circuit=circuit, seed=seed, echo=echo, **fields
        )

    default_samples = DEFAULT_TRAIN_SAMPLES if mode in CLOSED_LOOP_MODES else DEFAULT_SIM_SAMPLES
    sim = _parse_sim(document.get("sim", {}), default_samples)
    if "drive" in document:
        drive = _parse_drive(document["drive"])
    else:
        drive = default_reference_signal()
    echo += [("dt", sim.dt), ("n_samples", sim.n_samples), ("x1_0", sim.x0.x1),
             ("x2_0", sim.x0.x2)]
    if mode == "taylor-compare" and not isinstance(drive, BiasSine):
        raise ScenarioError("taylor-compare needs a bias-sine drive")

    reference_table = document.get("reference", {})
    tau = _number("reference", "tau", reference_table.get("tau", DEFAULT_TAU))
    y_d0 = reference_table.get("y_d0")
    if y_d0 is not None:
        if mode != "exact-fl":
            raise ScenarioError("[reference] y_d0 only applies to exact-fl")
        y_d0 = _number("reference", "y_d0", y_d0)
    if mode == "exact-fl":
        try:
            fields["reference"] = ReferenceModel(tau, y_d0)
        except ValueError as err:
            raise ScenarioError(f"[reference] {err}") from err
        echo.append(("tau", tau))

    if mode in CLOSED_LOOP_MODES:
        if "train" in document and mode == "replay":
            extra = set(train_table) - {"u_max"}
            if extra:
                raise ScenarioError(f"replay only accepts [train] u_max, got {sorted(extra)}")
        if mode == "replay":
            family, params = resolve_parameters(
                _required(document["controller"], "controller", "source"), base_dir
            )
        else:
            family, params = _initial_parameters(mode, train_table, seed, base_dir)
        u_max = train_table.get("u_max")
        try:
            fields["train"] = TrainConfig(
                dt=sim.dt,
                n_samples=sim.n_samples,
                tau=tau,
                v_signal=drive,
                x0=sim.x0,
                seed=seed,
                max_evals=_integer(
                    "train", "max_evals", train_table.get("max_evals", DEFAULT_MAX_EVALS)
                ),
                step_scale=_number(
                    "train", "step_scale", train_table.get("step_scale", DEFAULT_STEP_SCALE)
                ),
                u_max=None if u_max is None else _number("train", "u_max", u_max),
                batch_size=_integer(
                    "train", "batch_size", train_table.get("batch_size", DEFAULT_BATCH_SIZE)
                ),
            )
        except ValueError as err:
            if isinstance(err, ScenarioError):
                raise
            raise ScenarioError(f"[train] {err}") from err
        fields["family"] = family
        fields["params"] = params
        echo += [("tau", tau), ("family", family.name), ("n_params", family.n_params),
                 ("u_max", fields["train"].resolved_u_max(circuit))]
        if mode in TRAINING_MODES:
            echo += [("max_evals", fields["train"].max_evals),
                     ("step_scale", fields["train"].step_scale),
                     ("batch_size", fields["train"].batch_size)]
    elif "controller" in document or "train" in document:
        raise ScenarioError(f"mode {mode} takes no [controller] or [train] section")

    return Scenario(
        mode=mode,
        output=output,
        circuit=circuit,
        seed=seed,
        sim=sim,
        drive=drive,
        echo=echo,
        **fields,
    )


def load_scenario(filepath: str, seed: Optional[int] = None) -> Scenario:
    """
    Read and validate a scenario file.

    Args:
        filepath: Path to a *.scn file.
        seed: Overrides [train] seed when given.

    Returns:
        Scenario: The resolved scenario, with relative parameter paths taken from the
            file's directory.

    Raises:
        FileNotFoundError: If the file does not exist.
        ScenarioError: If the file is not valid TOML or fails validation.
    """
    with open(filepath, "rb") as f:
        try:
            document = tomli.load(f)
        except tomli.TOMLDecodeError as err:
            raise ScenarioError(f"{filepath}: {err}") from err
    base_dir = os.path.dirname(os.path.abspath(filepath))
    scenario = parse_scenario(document, base_dir=base_dir, seed=seed)
    logger.info("loaded %s scenario from %s", scenario.mode, filepath)
    return replace(scenario, path=filepath)
