import math

import numpy as np
import pytest

from halledge import ConfiningPotential, trace_curves
from halledge.dispersion import (AmbiguousInversionError, DispersionCurve,
                                 EnergyWindow, asymptote_check, default_k_grid,
                                 gap_test, inverse_image, power_derivative,
                                 sharp_trace_derivative, wave_number_check)
from halledge.oracle import parabolic_kinv, parabolic_omega
from halledge.verify import sample_minus_interval

from conftest import (PARA_B, PARA_G, POWER_P, POWER_V0, SHARP_B, SHARP_L,
                      SHARP_V0)


def test_window_validation():
    with pytest.raises(ValueError):
        EnergyWindow(0, 1.0, 2.0, 100.0)
    with pytest.raises(ValueError):
        EnergyWindow(0, 1.5, 3.0, 100.0)
    w = EnergyWindow(1, 1.5, 1.7, 100.0)
    assert w.lo == pytest.approx(350.0) and w.hi == pytest.approx(370.0)


def test_window_reference_field():
    pot = ConfiningPotential.parabolic(PARA_G)
    w = EnergyWindow.for_potential(pot, PARA_B, 0, 1.5, 2.5)
    assert w.reference_field == 5.0
    w2 = EnergyWindow.for_potential(ConfiningPotential.free(), 7.0, 0, 1.5, 2.5)
    assert w2.reference_field == 7.0


def test_free_curves_flat(free100_curves):
    for c in free100_curves:
        expected = (2 * c.band_index_j + 1) * 100.0
        assert np.max(np.abs(c.omega - expected)) <= 1e-4 * 100.0
        assert np.max(np.abs(c.d_omega_fh)) < 1e-6
        assert np.max(np.abs(c.d_omega_fd)) < 1e-6


def test_parabolic_curves_match_oracle(para_curves, para_model):
    for c in para_curves:
        exact = np.array([parabolic_omega(para_model, c.band_index_j, k)
                          for k in c.k_samples])
        assert np.max(np.abs(c.omega / exact - 1.0)) <= 1e-6


def test_curve_evenness_and_odd_slope(para_curves, sharp100_curves):
    for curves, ref in ((para_curves, 5.0), (sharp100_curves, 100.0)):
        for c in curves:
            assert np.max(np.abs(c.omega - c.omega[::-1])) <= 1e-8 * ref
            assert np.max(np.abs(c.d_omega_fh + c.d_omega_fh[::-1])) <= 1e-6 * ref


def test_fh_examples(para_curves, free100_curves):
    c0 = para_curves[0]
    i = int(np.argmin(np.abs(c0.k_samples + 2.0)))   # k = -2 is on the grid
    assert c0.k_samples[i] == pytest.approx(-2.0, abs=1e-12)
    assert c0.d_omega_fh[i] == pytest.approx(2 * (16 / 25) * (-2.0), rel=1e-6)
    mid = c0.k_samples.size // 2
    assert abs(c0.d_omega_fh[mid]) < 1e-10            # k = 0, even potential
    assert np.max(np.abs(free100_curves[0].d_omega_fh)) < 1e-8


def test_asymmetric_k_grid_rejected():
    pot = ConfiningPotential.free()
    with pytest.raises(ValueError):
        trace_curves(pot, 1.0, 0, np.linspace(-1.0, 2.0, 31))


def test_inverse_image_parabolic(para_curves, para_model):
    window = EnergyWindow.for_potential(
        ConfiningPotential.parabolic(PARA_G), PARA_B, 0, 1.5, 2.5)
    im = inverse_image(para_curves[0], window)
    lo = -parabolic_kinv(para_model, 0, 0, 2.5)
    hi = -parabolic_kinv(para_model, 0, 0, 1.5)
    assert im.minus_interval[0] == pytest.approx(lo, abs=2e-3)
    assert im.minus_interval[1] == pytest.approx(hi, abs=2e-3)
    # mirrored plus interval
    assert im.plus_interval == (-im.minus_interval[1], -im.minus_interval[0])


def test_inverse_image_empty_for_flat_band(free100_curves):
    window = EnergyWindow(0, 1.5, 1.7, 100.0)
    im = inverse_image(free100_curves[0], window)
    assert im.empty and im.minus_interval is None


def test_inverse_image_ambiguous():
    k = np.linspace(-10, 10, 401)
    wiggle = 5.0 + 2.0 * np.cos(k)      # repeatedly crosses 6.2-ish levels
    curve = DispersionCurve(0, ConfiningPotential.free(), 2.0, k, wiggle,
                            np.zeros_like(k), np.zeros_like(k))
    window = EnergyWindow(1, 1.05, 1.15, 2.0)   # [6.1, 6.3]
    with pytest.raises(AmbiguousInversionError):
        inverse_image(curve, window)


def test_gap_test_vacuous_and_parabolic(para_curves):
    pot = ConfiningPotential.parabolic(PARA_G)
    w0 = EnergyWindow.for_potential(pot, PARA_B, 0, 1.5, 2.5)
    res0 = gap_test(para_curves, w0)
    assert res0.passed and res0.gap_d_n == math.inf
    w1 = EnergyWindow.for_potential(pot, PARA_B, 1, 1.5, 2.5)
    res1 = gap_test(para_curves, w1)
    assert res1.passed
    assert res1.gap_d_n == pytest.approx(2 * 5.0, rel=1e-6)  # parallel parabolas
    assert res1.images_disjoint


def test_gap_test_sharp(sharp100_curves):
    window = EnergyWindow(0, 1.5, 1.7, SHARP_B)
    res = gap_test(sharp100_curves, window)
    assert res.passed and res.gap_d_n > res.window_width


def test_wave_number_check(sharp200_curves):
    window = EnergyWindow(0, 1.5, 1.7, 200.0)
    res = wave_number_check(sharp200_curves, window, alpha=3.0)
    assert res.threshold == pytest.approx(-200.0 / 3.0)
    assert res.passed and res.worst_endpoint < -66.66


def test_wave_number_vacuous(free100_curves):
    window = EnergyWindow(0, 1.5, 1.7, 100.0)
    res = wave_number_check(free100_curves, window, alpha=3.0)
    assert res.passed and res.worst_endpoint is None


def test_asymptote_reports(sharp100_curves, para_curves, free100_curves):
    sharp_rep = asymptote_check(sharp100_curves[0],
                                sharp100_curves[0].potential)
    assert sharp_rep.expected_limit == pytest.approx(100.0 + SHARP_V0)
    assert sharp_rep.gap_at_kmax > 0 and sharp_rep.gap_monotone
    para_rep = asymptote_check(para_curves[0], para_curves[0].potential)
    assert para_rep.unbounded_growth
    free_rep = asymptote_check(free100_curves[0], free100_curves[0].potential)
    assert free_rep.gap_at_kmax <= 1e-4 * 100.0


def test_sharp_trace_route(sharp100_curves):
    pot = sharp100_curves[0].potential
    window = EnergyWindow(0, 1.5, 1.7, SHARP_B)
    smp = sample_minus_interval(pot, SHARP_B, sharp100_curves, window, 0, 9)
    assert smp is not None
    for k, grid, phi, d_fh in zip(smp.k, smp.grids, smp.phis, smp.d_omega_fh):
        alt = sharp_trace_derivative(grid, phi, pot, SHARP_B)
        assert alt == pytest.approx(d_fh, rel=0.02)
        assert d_fh < 0


def test_sharp_trace_symmetric_zero():
    pot = ConfiningPotential.sharp(SHARP_V0, SHARP_L)
    from halledge.fiber import solve_fiber
    grid, pairs = solve_fiber(pot, SHARP_B, 0.0, 1)
    assert abs(sharp_trace_derivative(grid, pairs[0].phi, pot, SHARP_B)) < 1e-10


def test_sharp_trace_wrong_potential():
    pot = ConfiningPotential.free()
    from halledge.fiber import Grid
    with pytest.raises(ValueError):
        sharp_trace_derivative(Grid(-1, 1, 11), np.zeros(11), pot, 1.0)


def test_power_route(power100_curves):
    pot = power100_curves[0].potential
    window = EnergyWindow(0, 1.5, 1.7, SHARP_B)
    smp = sample_minus_interval(pot, SHARP_B, power100_curves, window, 0, 9)
    assert smp is not None
    for k, grid, phi, d_fh in zip(smp.k, smp.grids, smp.phis, smp.d_omega_fh):
        alt = power_derivative(grid, phi, pot, SHARP_B)
        assert alt == pytest.approx(d_fh, rel=0.01)


def test_power_route_zero_at_origin():
    pot = ConfiningPotential.power(POWER_V0, SHARP_L, POWER_P)
    from halledge.fiber import solve_fiber
    grid, pairs = solve_fiber(pot, SHARP_B, 0.0, 1)
    assert abs(power_derivative(grid, pairs[0].phi, pot, SHARP_B)) < 1e-10


def test_band_separation_positive(sharp100_curves, para_curves):
    for curves in (sharp100_curves, para_curves):
        for a, b in zip(curves, curves[1:]):
            assert np.min(b.omega - a.omega) > 0


def test_default_k_grid_shape():
    pot = ConfiningPotential.sharp(SHARP_V0, SHARP_L)
    kg = default_k_grid(pot, SHARP_B, 1, 401)
    assert kg.size == 401 and kg[0] == -kg[-1]
    assert kg[-1] >= SHARP_B * SHARP_L / 2 + 6 * math.sqrt(3 * SHARP_B)
