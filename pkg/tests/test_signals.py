import math

import numpy as np
import pytest

from jjosc.signals import BiasSine, PiecewiseConstant


def test_bias_sine_constant():
    u = BiasSine(0.05)
    assert u(0.0) == 0.05
    assert u(123.4) == 0.05


def test_bias_sine_values():
    u = BiasSine(0.1, 0.02, 2.0)
    assert u(0.0) == pytest.approx(0.1)
    assert u(math.pi / 4) == pytest.approx(0.12)


def test_bias_sine_deviation_removes_bias():
    u = BiasSine(0.1, 0.02, 2.0)
    d = u.deviation()
    for t in (0.0, 0.3, 1.7):
        assert d(t) == pytest.approx(u(t) - 0.1)


def test_sample_uses_sample_grid():
    u = BiasSine(0.0, 1.0, 1.0)
    samples = u.sample(4, 0.5)
    assert samples == pytest.approx(np.sin([0.0, 0.5, 1.0, 1.5]))


def test_piecewise_constant_holds_levels():
    v = PiecewiseConstant((0.0, 2.0, 4.0), (0.012, 0.019, 0.009))
    assert v(0.0) == 0.012
    assert v(1.99) == 0.012
    assert v(2.0) == 0.019
    assert v(3.5) == 0.019
    assert v(100.0) == 0.009


def test_piecewise_constant_from_breakpoints():
    v = PiecewiseConstant.from_breakpoints([(0.0, 1.0), (1.0, 2.0)])
    assert v.times == (0.0, 1.0)
    assert v.levels == (1.0, 2.0)


def test_piecewise_constant_sample_switches_on_breakpoint():
    v = PiecewiseConstant((0.0, 2.0), (1.0, 3.0))
    samples = v.sample(401, 0.01)
    assert samples[199] == 1.0
    assert samples[200] == 3.0


@pytest.mark.parametrize(
    "times, levels",
    [
        ((), ()),
        ((0.0, 1.0), (1.0,)),
        ((0.5, 1.0), (1.0, 2.0)),
        ((0.0, 1.0, 1.0), (1.0, 2.0, 3.0)),
        ((0.0, 2.0, 1.0), (1.0, 2.0, 3.0)),
    ],
)
def test_piecewise_constant_rejects_bad_breakpoints(times, levels):
    with pytest.raises(ValueError):
        PiecewiseConstant(times, levels)
