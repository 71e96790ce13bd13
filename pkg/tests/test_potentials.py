import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halledge.potentials import ConfiningPotential

SHARP = ConfiningPotential.sharp(600.0, 1.0)
POWER = ConfiningPotential.power(2.0, 1.0, 2.0)
PARA = ConfiningPotential.parabolic(4.0)
FREE = ConfiningPotential.free()
ALL = [SHARP, POWER, PARA, FREE]


def test_sharp_values():
    assert SHARP.evaluate(0.0) == 0.0
    assert SHARP.evaluate(0.75) == 600.0
    assert SHARP.evaluate(0.5) == 300.0       # midpoint convention on the wall
    assert SHARP.evaluate(-0.5) == 300.0


def test_power_value():
    assert POWER.evaluate(1.5) == pytest.approx(2.0 * (1.5 - 0.5) ** 2, rel=1e-15)
    assert POWER.evaluate(0.3) == 0.0


def test_parabolic_value():
    assert PARA.evaluate(3.0) == pytest.approx(144.0, rel=1e-15)


def test_limits():
    assert SHARP.limit_at_infinity == 600.0
    assert POWER.limit_at_infinity == math.inf
    assert FREE.limit_at_infinity == 0.0


@given(st.floats(-50, 50, allow_nan=False))
@settings(max_examples=200)
def test_evenness(x):
    for pot in ALL:
        assert pot.evaluate(x) == pot.evaluate(-x)


def test_evenness_bulk():
    rng = np.random.default_rng(7)
    x = rng.uniform(-30, 30, 10_000)
    for pot in ALL:
        assert np.array_equal(pot.evaluate(x), pot.evaluate(-x))


def test_bounded_by_limit():
    x = np.linspace(-40, 40, 2001)
    for pot in ALL:
        v = pot.evaluate(x)
        assert np.all(v >= 0)
        if math.isfinite(pot.limit_at_infinity):
            assert np.all(v <= pot.limit_at_infinity)


def test_nondecreasing_away_from_origin():
    x = np.linspace(0.0, 20.0, 4001)
    for pot in ALL:
        v = pot.evaluate(x)
        assert np.all(np.diff(v) >= 0)


def test_smooth_derivative_values():
    assert POWER.smooth_derivative(1.5) == pytest.approx(4.0, rel=1e-15)
    assert PARA.smooth_derivative(0.0) == 0.0
    assert SHARP.smooth_derivative(0.5) is None
    assert FREE.smooth_derivative(3.0) == 0.0


@pytest.mark.parametrize("pot,x0", [(POWER, 1.5), (POWER, -2.0),
                                    (PARA, 0.7), (PARA, -3.0)])
def test_derivative_matches_central_difference(pot, x0):
    # O(h^2) convergence away from the wall
    errs = []
    for h in (1e-2, 5e-3):
        fd = (pot.evaluate(x0 + h) - pot.evaluate(x0 - h)) / (2 * h)
        errs.append(abs(fd - pot.smooth_derivative(x0)))
    assert errs[0] <= max(4.2 * errs[1], 1e-12)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        ConfiningPotential.power(1.0, 1.0, 1.0)   # exponent must exceed 1
    with pytest.raises(ValueError):
        ConfiningPotential.sharp(1.0, 0.0)
    with pytest.raises(ValueError):
        ConfiningPotential.parabolic(0.0)
