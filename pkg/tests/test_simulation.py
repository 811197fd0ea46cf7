import math

import numpy as np
import pytest

from jjosc.circuit import CircuitParams, State, output_energy
from jjosc.exceptions import (
    DomainError,
    SingularityError,
    TrajectoryTruncatedError,
)
from jjosc.signals import BiasSine, PiecewiseConstant
from jjosc.simulation import SimConfig, rk4_step, simulate_linear, simulate_nonlinear
from jjosc.utils.signal_utils import dominant_angular_frequency


@pytest.fixture
def params():
    return CircuitParams(I0=0.2, kappa=1.0, C0=0.1)


@pytest.mark.parametrize(
    "dt, n_samples",
    [(0.0, 10), (-0.01, 10), (math.nan, 10), (0.01, 0), (0.01, 2.5)],
)
def test_sim_config_rejects_bad_values(dt, n_samples):
    with pytest.raises(ValueError):
        SimConfig(dt=dt, n_samples=n_samples)


def test_rk4_step_exact_for_linear_growth():
    x1, x2 = rk4_step(lambda a, b: (1.0, 2.0), 0.0, 0.0, 0.5)
    assert (x1, x2) == pytest.approx((0.5, 1.0))


def test_rk4_global_error_is_fourth_order():
    def final_error(dt):
        cfg = SimConfig(dt=dt, n_samples=int(round(10.0 / dt)), x0=State(1.0, 0.0))
        traj = simulate_linear(((0.0, 1.0), (-1.0, 0.0)), (0.0, 0.0), cfg, BiasSine(0.0))
        exact = np.cos(traj.t)
        return float(np.max(np.abs(traj.x1 - exact)))

    ratio = final_error(0.1) / final_error(0.05)
    assert 12.0 <= ratio <= 20.0


def test_trajectory_shape_and_time_grid(params):
    cfg = SimConfig(dt=0.01, n_samples=100)
    traj = simulate_nonlinear(params, cfg, BiasSine(0.05))
    assert len(traj) == 101
    for column in (traj.x1, traj.x2, traj.u, traj.y):
        assert len(column) == 101
    assert traj.t[0] == 0.0
    assert traj.t[-1] == pytest.approx(1.0)
    assert traj.v is None
    assert list(traj.columns()) == ["t", "x1", "x2", "u", "y"]


def test_zero_input_from_origin_stays_at_rest(params):
    traj = simulate_nonlinear(params, SimConfig(n_samples=200), BiasSine(0.0))
    assert np.all(traj.x1 == 0.0)
    assert np.all(traj.x2 == 0.0)
    assert np.all(traj.y == 0.0)


def test_equilibrium_is_held(params):
    cfg = SimConfig(n_samples=500, x0=State(-0.05, 0.0))
    traj = simulate_nonlinear(params, cfg, BiasSine(0.05))
    assert np.all(traj.x1 == -0.05)
    assert np.all(traj.x2 == 0.0)


def test_unforced_energy_is_conserved(params):
    cfg = SimConfig(dt=0.01, n_samples=2000, x0=State(0.1, 0.0))
    traj = simulate_nonlinear(params, cfg, BiasSine(0.0))
    assert traj.y == pytest.approx(np.full(len(traj), traj.y[0]), rel=1e-5)
    assert traj.y[0] == pytest.approx(output_energy(params, cfg.x0))


def test_oscillates_about_operating_point(params):
    traj = simulate_nonlinear(params, SimConfig(), BiasSine(0.05))
    assert np.max(traj.x1) <= 1e-6
    assert np.min(traj.x1) < -0.09
    assert np.mean(traj.x1) == pytest.approx(-0.05, abs=1e-2)


def test_inadmissible_initial_state(params):
    with pytest.raises(DomainError):
        simulate_nonlinear(params, SimConfig(x0=State(0.2, 0.0)), BiasSine(0.0))


def test_truncation_carries_partial_trajectory(params):
    cfg = SimConfig(dt=0.01, n_samples=2000)
    with pytest.raises(TrajectoryTruncatedError) as excinfo:
        simulate_nonlinear(params, cfg, BiasSine(0.25))
    partial = excinfo.value.trajectory
    assert 1 <= len(partial) < 2001
    assert np.all(np.abs(partial.x1) < params.I0)
    assert len(partial.x1) == len(partial.u) == len(partial.y)
    assert isinstance(excinfo.value, DomainError)


def test_closed_loop_records_reference(params):
    v = PiecewiseConstant((0.0, 0.5), (0.01, 0.02))
    seen = []

    def controller(x1, x2, v_k):
        seen.append(v_k)
        return 0.0

    traj = simulate_nonlinear(params, SimConfig(n_samples=100), v, controller)
    assert len(seen) == 101
    assert traj.v[0] == 0.01
    assert traj.v[-1] == 0.02
    assert np.all(traj.u == 0.0)
    assert list(traj.columns()) == ["t", "x1", "x2", "u", "y", "v"]


def test_continuous_feedback_evaluates_every_stage(params):
    calls = {"n": 0}

    def controller(x1, x2, v_k):
        calls["n"] += 1
        return -0.5 * x1

    simulate_nonlinear(
        params, SimConfig(n_samples=10, x0=State(0.05, 0.1)), BiasSine(0.0), controller
    )
    assert calls["n"] == 11
    calls["n"] = 0
    simulate_nonlinear(
        params,
        SimConfig(n_samples=10, x0=State(0.05, 0.1)),
        BiasSine(0.0),
        controller,
        continuous_feedback=True,
    )
    assert calls["n"] == 11 + 4 * 10


def test_controller_error_carries_partial_trajectory(params):
    def controller(x1, x2, v_k):
        if len(calls) == 3:
            raise SingularityError("stop")
        calls.append(x1)
        return 0.0

    calls = []
    with pytest.raises(SingularityError) as excinfo:
        simulate_nonlinear(params, SimConfig(n_samples=10), BiasSine(0.0), controller)
    assert len(excinfo.value.trajectory) == 3


def test_linear_simulation_leaves_output_empty():
    traj = simulate_linear(
        ((0.0, 0.2), (-10.0, 0.0)), (0.0, -10.0), SimConfig(n_samples=50), BiasSine(0.0)
    )
    assert np.all(np.isnan(traj.y))
    assert np.all(traj.x1 == 0.0)


def test_linear_simulation_rejects_bad_shapes():
    with pytest.raises(ValueError):
        simulate_linear(((0.0, 1.0),), (0.0, 1.0), SimConfig(n_samples=5), BiasSine(0.0))


def test_linear_simulation_oscillates_at_root_two():
    traj = simulate_linear(
        ((0.0, 0.2), (-10.0, 0.0)),
        (0.0, -10.0),
        SimConfig(dt=0.01, n_samples=2000, x0=State(0.01, 0.0)),
        BiasSine(0.0),
    )
    assert dominant_angular_frequency(traj.t, traj.x1) == pytest.approx(math.sqrt(2.0), rel=1e-2)
    assert np.max(np.abs(traj.x1)) == pytest.approx(0.01, rel=1e-6)
    assert traj.x1[-1] == pytest.approx(0.01 * math.cos(math.sqrt(2.0) * 20.0), abs=1e-8)
