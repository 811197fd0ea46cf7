import math

import numpy as np
import pytest

from jjosc.circuit import (
    CircuitParams,
    State,
    admissible_limit,
    check_admissible,
    dynamics,
    gamma,
    inductance,
    output_energy,
    output_gradient,
    stored_energy_split,
)
from jjosc.exceptions import CircuitError, DomainError


@pytest.fixture
def params():
    return CircuitParams(I0=0.2, kappa=1.0, C0=0.1)


def test_l0_is_kappa_over_i0(params):
    assert params.L0 == pytest.approx(5.0)


@pytest.mark.parametrize(
    "I0, kappa, C0",
    [(0.0, 1.0, 0.1), (-0.2, 1.0, 0.1), (0.2, 0.0, 0.1), (0.2, 1.0, -1.0), (0.2, math.inf, 0.1)],
)
def test_non_physical_params_rejected(I0, kappa, C0):
    with pytest.raises(ValueError):
        CircuitParams(I0=I0, kappa=kappa, C0=C0)


@pytest.mark.parametrize(
    "x1, expected",
    [(0.0, 5.0), (0.1, 5.773502692), (-0.05, 5.163977795)],
)
def test_inductance_values(params, x1, expected):
    assert inductance(params, x1) == pytest.approx(expected, rel=1e-9)


def test_inductance_is_even_and_at_least_l0(params):
    for x1 in np.linspace(-0.19, 0.19, 39):
        assert inductance(params, x1) == inductance(params, -x1)
        assert inductance(params, x1) >= params.L0


@pytest.mark.parametrize("x1", [0.2, -0.2, 0.25, math.nan, math.inf])
def test_inductance_outside_domain_raises(params, x1):
    with pytest.raises(DomainError):
        inductance(params, x1)


def test_domain_error_is_a_value_error_and_circuit_error(params):
    with pytest.raises(ValueError):
        check_admissible(params, 0.3)
    with pytest.raises(CircuitError):
        check_admissible(params, 0.3)


def test_admissible_limit_just_below_i0(params):
    limit = admissible_limit(params)
    assert limit < params.I0
    assert limit == pytest.approx(params.I0, rel=1e-11)
    check_admissible(params, 0.199999)


def test_dynamics_values(params):
    dx1, dx2 = dynamics(params, State(0.1, 0.2), 0.0)
    assert dx1 == pytest.approx(0.2 / 5.773502692, rel=1e-9)
    assert dx1 == pytest.approx(0.0346410, rel=1e-5)
    assert dx2 == pytest.approx(-1.0)


def test_dynamics_rest_at_equilibrium(params):
    assert dynamics(params, State(-0.05, 0.0), 0.05) == (0.0, 0.0)


def test_output_energy_values(params):
    assert output_energy(params, State(0.0, 0.0)) == 0.0
    assert output_energy(params, State(0.0, 0.5)) == pytest.approx(0.0125)
    assert output_energy(params, State(0.1, 0.2)) == pytest.approx(0.0308675, rel=1e-5)


def test_stored_energy_split_sums_to_output(params):
    s = State(0.13, -0.4)
    inductive, capacitive = stored_energy_split(params, s)
    assert inductive + capacitive == pytest.approx(output_energy(params, s), rel=1e-15)
    assert capacitive == pytest.approx(0.5 * 0.1 * 0.16)


def test_gamma_value(params):
    # 1 / (2 * 0.04 * 25)
    assert gamma(params) == pytest.approx(0.5)


def test_output_gradient_value(params):
    g1, g2 = output_gradient(params, State(0.1, 0.3))
    assert g1 == pytest.approx(0.673575314, rel=1e-8)
    assert g2 == pytest.approx(0.03)


def test_output_gradient_matches_central_differences():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        p = CircuitParams(
            I0=rng.uniform(0.05, 2.0), kappa=rng.uniform(0.1, 3.0), C0=rng.uniform(0.01, 1.0)
        )
        s = State(rng.uniform(-0.9, 0.9) * p.I0, rng.uniform(-2.0, 2.0))
        h = 1e-6 * p.I0
        fd1 = (
            output_energy(p, State(s.x1 + h, s.x2)) - output_energy(p, State(s.x1 - h, s.x2))
        ) / (2 * h)
        fd2 = (
            output_energy(p, State(s.x1, s.x2 + 1e-6)) - output_energy(p, State(s.x1, s.x2 - 1e-6))
        ) / 2e-6
        g1, g2 = output_gradient(p, s)
        assert g1 == pytest.approx(fd1, rel=1e-6, abs=1e-7)
        assert g2 == pytest.approx(fd2, rel=1e-6, abs=1e-7)


def test_alternative_gamma_fails_finite_differences():
    p = CircuitParams(I0=0.2, kappa=1.0, C0=0.1)
    s = State(0.15, 0.0)
    x1, L = s.x1, inductance(p, s.x1)
    wrong = x1 * L * (1.0 + x1 * x1 * L * L / (2 * p.I0 * p.L0**2))
    h = 1e-7
    fd = (output_energy(p, State(x1 + h, 0.0)) - output_energy(p, State(x1 - h, 0.0))) / (2 * h)
    assert output_gradient(p, s)[0] == pytest.approx(fd, rel=1e-6)
    assert wrong != pytest.approx(fd, rel=1e-2)
