from pathlib import Path

import numpy as np
import pytest

from jjosc.exceptions import ScenarioError
from jjosc.neural_controller import encode, load_table1, save_vector
from jjosc.scenario import MODES, load_scenario, parse_scenario, resolve_parameters
from jjosc.signals import BiasSine, PiecewiseConstant
from jjosc.trainer import LinearFamily, NeuralFamily
from jjosc.utils.constants import GAIN_STEP_LEVELS, REFERENCE_STEP_LEVELS

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
BUNDLED = sorted(SCENARIOS.glob("*.scn"))

CIRCUIT = {"I0": 0.2, "kappa": 1.0, "C0": 0.1}


def document(mode, **sections):
    doc = {"mode": mode, "output": "out", "circuit": dict(CIRCUIT)}
    doc.update(sections)
    return doc


def test_bundled_scenarios_are_present():
    names = {path.stem for path in BUNDLED}
    assert {"fig2", "fig3", "fig4", "fig5", "fig6", "fig9", "fig12", "table1-replay"} <= names


@pytest.mark.parametrize("path", BUNDLED, ids=lambda p: p.stem)
def test_bundled_scenarios_validate(path):
    scenario = load_scenario(str(path))
    assert scenario.mode in MODES
    assert scenario.output == path.stem
    assert scenario.path == str(path)


def test_fig2_scenario_values():
    scenario = load_scenario(str(SCENARIOS / "fig2.scn"))
    assert scenario.mode == "taylor-compare"
    assert (scenario.circuit.I0, scenario.circuit.kappa, scenario.circuit.C0) == (0.2, 1.0, 0.1)
    assert (scenario.sim.dt, scenario.sim.n_samples) == (0.01, 2000)
    assert scenario.drive == BiasSine(0.05)
    assert scenario.sim.x0 == (-0.045, 0.0)


def test_taylor_scenarios_share_the_offset_from_equilibrium():
    for name in ("fig2", "fig3", "fig4", "fig5"):
        scenario = load_scenario(str(SCENARIOS / f"{name}.scn"))
        assert scenario.sim.x0.x1 + scenario.drive.a0 == pytest.approx(0.005)
        assert scenario.sim.x0.x2 == 0.0


def test_fig6_grid():
    scenario = load_scenario(str(SCENARIOS / "fig6.scn"))
    assert len(scenario.grid) == 201
    assert scenario.grid[0] == pytest.approx(-0.199)
    assert scenario.grid[-1] == pytest.approx(0.199)


def test_training_scenario_resolution():
    scenario = load_scenario(str(SCENARIOS / "fig9.scn"))
    assert isinstance(scenario.family, NeuralFamily)
    assert scenario.params.shape == (32,)
    assert np.all(np.abs(scenario.params) <= 1.0)
    assert not np.array_equal(scenario.params, encode(load_table1()))
    assert scenario.train.v_signal.levels == REFERENCE_STEP_LEVELS
    assert scenario.train.max_evals == 20000
    assert scenario.train.n_samples == 1000
    assert isinstance(scenario.train.v_signal, PiecewiseConstant)


def test_training_scenarios_use_the_drawn_levels():
    for name in ("fig9", "table1-replay"):
        assert load_scenario(str(SCENARIOS / f"{name}.scn")).drive.levels == REFERENCE_STEP_LEVELS
    assert load_scenario(str(SCENARIOS / "fig12.scn")).train.v_signal.levels == GAIN_STEP_LEVELS


def test_seed_override():
    assert load_scenario(str(SCENARIOS / "fig12.scn"), seed=99).train.seed == 99
    assert load_scenario(str(SCENARIOS / "fig12.scn")).train.seed == 7


def test_missing_c0():
    doc = document("simulate", drive={"kind": "bias-sine", "a0": 0.05})
    del doc["circuit"]["C0"]
    with pytest.raises(ScenarioError, match="C0"):
        parse_scenario(doc)


@pytest.mark.parametrize(
    "doc",
    [
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "bias-sine", "a0": 0.0}, "extra": 1},
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "bias-sine", "a0": 0.0}, "plot": {}},
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "bias-sine", "a0": 0.0, "phase": 1}},
        {"mode": "dance", "circuit": CIRCUIT},
        {"circuit": CIRCUIT},
        {"mode": "simulate", "circuit": CIRCUIT},
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "square"}},
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "bias-sine", "a0": "big"}},
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "bias-sine", "a0": 0.0, "times": [0.0]}},
        {"mode": "simulate", "circuit": {**CIRCUIT, "C0": -1.0}, "drive": {"kind": "bias-sine", "a0": 0.0}},
        {"mode": "simulate", "circuit": CIRCUIT, "sim": {"dt": -0.01}, "drive": {"kind": "bias-sine", "a0": 0.0}},
        {"mode": "simulate", "circuit": CIRCUIT, "sim": {"n_samples": 10.5}, "drive": {"kind": "bias-sine", "a0": 0.0}},
        {"mode": "taylor-compare", "circuit": CIRCUIT, "drive": {"kind": "piecewise-constant", "times": [0.0], "levels": [0.1]}},
        {"mode": "omega0-curve", "circuit": CIRCUIT, "curve": {"x_min": 0.1, "x_max": -0.1, "n_points": 5}},
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "piecewise-constant", "times": [1.0], "levels": [0.1]}},
        {"mode": "simulate", "circuit": CIRCUIT, "drive": {"kind": "bias-sine", "a0": 0.0}, "train": {"seed": 1}},
        {"mode": "train-linear", "circuit": CIRCUIT, "train": {"n_hidden": 4}},
        {"mode": "train-linear", "circuit": CIRCUIT, "train": {"init": "table1"}},
        {"mode": "train-nn", "circuit": CIRCUIT, "reference": {"y_d0": 0.1}},
        {"mode": "replay", "circuit": CIRCUIT, "controller": {"source": "table1"}, "train": {"seed": 3}},
        {"mode": "frequency-response", "circuit": CIRCUIT, "sweep": {"u_bar": 0.05, "omega_min": -1.0, "omega_max": 2.0, "n_points": 5}},
    ],
)
def test_invalid_documents(doc):
    with pytest.raises(ScenarioError):
        parse_scenario(doc)


def test_defaults_for_simulation():
    scenario = parse_scenario(document("simulate", drive={"kind": "bias-sine", "a0": 0.05}))
    assert (scenario.sim.dt, scenario.sim.n_samples) == (0.01, 2000)
    assert scenario.sim.x0 == (0.0, 0.0)
    assert scenario.train is None


def test_training_defaults():
    scenario = parse_scenario(document("train-linear"))
    assert isinstance(scenario.family, LinearFamily)
    assert scenario.params.tolist() == [-0.6176, 0.041, 1.8195]
    assert scenario.train.n_samples == 1000
    assert scenario.train.seed == 7
    assert len(scenario.train.v_signal.levels) == 5


def test_random_nn_init_is_seeded():
    a = parse_scenario(document("train-nn", train={"seed": 3, "n_hidden": 4}))
    b = parse_scenario(document("train-nn", train={"seed": 3, "n_hidden": 4}))
    c = parse_scenario(document("train-nn", train={"seed": 4, "n_hidden": 4}))
    assert a.params.shape == (16,)
    assert np.array_equal(a.params, b.params)
    assert not np.array_equal(a.params, c.params)
    assert np.all(np.abs(a.params) <= 1.0)


def test_exact_fl_reference():
    scenario = parse_scenario(
        document(
            "exact-fl",
            drive={"kind": "piecewise-constant", "times": [0.0], "levels": [0.01]},
            reference={"tau": 2.0, "y_d0": 0.01},
        )
    )
    assert scenario.reference.tau == 2.0
    assert scenario.reference.y_d0 == 0.01


def test_resolve_parameters_from_files(tmp_path):
    save_vector([1.0, 2.0, 3.0], str(tmp_path / "gains.txt"))
    save_vector(np.zeros(8), str(tmp_path / "nn.txt"))
    save_vector(np.zeros(5), str(tmp_path / "bad.txt"))

    family, vector = resolve_parameters("gains.txt", str(tmp_path))
    assert isinstance(family, LinearFamily)
    assert vector.tolist() == [1.0, 2.0, 3.0]

    family, vector = resolve_parameters(str(tmp_path / "nn.txt"), "/elsewhere")
    assert isinstance(family, NeuralFamily)
    assert family.n_hidden == 2

    with pytest.raises(ScenarioError):
        resolve_parameters("bad.txt", str(tmp_path))
    with pytest.raises(ScenarioError):
        resolve_parameters("missing.txt", str(tmp_path))


def test_replay_source_relative_to_scenario_file(tmp_path):
    save_vector([0.0, 0.0, 1.0], str(tmp_path / "gains.txt"))
    path = tmp_path / "replay.scn"
    path.write_text(
        'mode = "replay"\n'
        "[circuit]\nI0 = 0.2\nkappa = 1.0\nC0 = 0.1\n"
        '[controller]\nsource = "gains.txt"\n',
        encoding="utf-8",
    )
    scenario = load_scenario(str(path))
    assert isinstance(scenario.family, LinearFamily)
    assert scenario.output == "replay"


def test_malformed_toml(tmp_path):
    path = tmp_path / "broken.scn"
    path.write_text("mode = \n[circuit\n", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_scenario(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(str(tmp_path / "nope.scn"))
