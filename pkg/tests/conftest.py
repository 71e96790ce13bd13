"""Session fixtures: the shared curve sets the test modules reuse.

The fiber sweeps are the expensive part of the suite, so each (potential,
field) combination is traced once per session.
"""

import time

import numpy as np
import pytest

from halledge import ConfiningPotential, trace_curves
from halledge.dispersion import default_k_grid
from halledge.oracle import ParabolicModel

PARA_B, PARA_G = 3.0, 4.0
SHARP_B, SHARP_L = 100.0, 1.0
SHARP_V0 = 2.0 * (2 * 0 + 1.7) * SHARP_B          # window-scaled, n=0, c=1.7
POWER_P = 2.0
POWER_V0 = (2 * 0 + 1.7) * SHARP_B ** ((POWER_P + 2) / 2)

# wall-clock seconds of selected fixture builds, for the runtime criteria
FIXTURE_TIMES = {}


@pytest.fixture(scope="session")
def para_model():
    return ParabolicModel(PARA_B, PARA_G)


@pytest.fixture(scope="session")
def para_curves():
    """Parabolic channel B=3, g=4: bands 0..3 on k in [-10, 10], 101 samples."""
    pot = ConfiningPotential.parabolic(PARA_G)
    k_grid = np.linspace(-10.0, 10.0, 101)
    t0 = time.perf_counter()
    curves = trace_curves(pot, PARA_B, 3, k_grid, keep_phi=True)
    FIXTURE_TIMES["para_curves"] = time.perf_counter() - t0
    return curves


@pytest.fixture(scope="session")
def para100_curves():
    """Parabolic channel at B = 100 (slope routes are exact in k there)."""
    pot = ConfiningPotential.parabolic(PARA_G)
    k_grid = default_k_grid(pot, 100.0, 1, 401)
    return trace_curves(pot, 100.0, 1, k_grid)


@pytest.fixture(scope="session")
def free1_curves():
    pot = ConfiningPotential.free()
    k_grid = default_k_grid(pot, 1.0, 3, 401)
    return trace_curves(pot, 1.0, 3, k_grid)


@pytest.fixture(scope="session")
def sharp100_curves():
    """Sharp wall V0 = 2(2n+c)B at B=100: bands 0..1, dense symmetric grid.

    The 2401-point k-grid resolves the band knee near the wall asymptote
    well enough for the 1e-3 slope-route tolerance.
    """
    pot = ConfiningPotential.sharp(SHARP_V0, SHARP_L)
    k_grid = default_k_grid(pot, SHARP_B, 1, 2401)
    return trace_curves(pot, SHARP_B, 1, k_grid)


@pytest.fixture(scope="session")
def power100_curves():
    pot = ConfiningPotential.power(POWER_V0, SHARP_L, POWER_P)
    k_grid = default_k_grid(pot, SHARP_B, 1, 801)
    return trace_curves(pot, SHARP_B, 1, k_grid)


def power_wall_curves(B, samples=401):
    """Window-scaled power wall V0 = (2n+c) B^{(p+2)/2}, band 0 only."""
    pot = ConfiningPotential.power((2 * 0 + 1.7) * B ** ((POWER_P + 2) / 2),
                                   SHARP_L, POWER_P)
    k_grid = default_k_grid(pot, B, 1, samples)
    return trace_curves(pot, B, 0, k_grid)


@pytest.fixture(scope="session")
def power_curves_by_b(power100_curves):
    """Power-wall band 0 at B in {100, 200, 400} for the tail scaling checks."""
    return {100.0: power100_curves,
            200.0: power_wall_curves(200.0),
            400.0: power_wall_curves(400.0)}


@pytest.fixture(scope="session")
def free100_curves():
    pot = ConfiningPotential.free()
    k_grid = default_k_grid(pot, 100.0, 3, 401)
    return trace_curves(pot, 100.0, 3, k_grid)


@pytest.fixture(scope="session")
def sharp200_curves():
    pot = ConfiningPotential.sharp(2.0 * 1.7 * 200.0, 1.0)
    k_grid = default_k_grid(pot, 200.0, 1, 401)
    return trace_curves(pot, 200.0, 0, k_grid)
