"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one pass/fail line (visible with `pytest -s` or in the
captured output) and asserts the criterion.
"""

import math
import time

import numpy as np
import pytest

from halledge import ConfiningPotential, EnergyWindow, trace_curves
from halledge import current as cur
from halledge import cylinder as cyl
from halledge import verify as ver
from halledge.cli import main as cli_main
from halledge.dispersion import (default_k_grid, inverse_image,
                                 power_derivative, sharp_trace_derivative,
                                 wave_number_check)
from halledge.oracle import parabolic_omega, parabolic_phi

from conftest import (FIXTURE_TIMES, PARA_B, PARA_G, POWER_P, SHARP_B,
                      SHARP_L, SHARP_V0)


def report(num: int, name: str, ok: bool, detail: str = ""):
    print(f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'}"
          + (f"  ({detail})" if detail else ""))
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def test_criterion_01_parabolic_oracle(para_curves, para_model):
    worst_omega = 0.0
    worst_phi = 0.0
    for c in para_curves:
        j = c.band_index_j
        exact = np.array([parabolic_omega(para_model, j, k) for k in c.k_samples])
        worst_omega = max(worst_omega, float(np.max(np.abs(c.omega / exact - 1))))
        for i, k in enumerate(c.k_samples):
            grid, phi = c.grids[i], c.phi_cache[i]
            x = grid.points()
            ref = parabolic_phi(para_model, j, x, float(k))
            if float(np.dot(ref, phi)) < 0:
                ref = -ref
            worst_phi = max(worst_phi, float(np.max(np.abs(phi - ref))))
    elapsed = FIXTURE_TIMES.get("para_curves", 0.0)
    ok = worst_omega <= 1e-6 and worst_phi <= 1e-5 and elapsed < 30.0
    report(1, "parabolic oracle equivalence", ok,
           f"rel_omega={worst_omega:.2e} maxnorm_phi={worst_phi:.2e} "
           f"trace_time={elapsed:.1f}s")


def test_criterion_02_landau_levels(free1_curves, free100_curves):
    worst = 0.0
    for B, curves in ((1.0, free1_curves), (100.0, free100_curves)):
        for c in curves:
            expected = (2 * c.band_index_j + 1) * B
            worst = max(worst, float(np.max(np.abs(c.omega - expected))) / B)
    report(2, "Landau-level oracle", worst <= 1e-4, f"worst/B={worst:.2e}")


def test_criterion_03_slope_routes(sharp100_curves, power100_curves,
                                   para100_curves):
    worst = 0.0
    for curves in (sharp100_curves, power100_curves, para100_curves):
        B = curves[0].field_b
        for c in curves:
            err = np.abs(c.d_omega_fh[1:-1] - c.d_omega_fd[1:-1])
            tol = np.maximum(1e-3 * np.abs(c.d_omega_fh[1:-1]),
                             1e-3 * math.sqrt(B))
            worst = max(worst, float(np.max(err / tol)))
    report(3, "Feynman-Hellmann vs finite differences", worst <= 1.0,
           f"worst err/tol={worst:.3f}")


def test_criterion_04_sharp_trace_route(sharp100_curves):
    pot = sharp100_curves[0].potential
    window = EnergyWindow(0, 1.5, 1.7, SHARP_B)
    smp = ver.sample_minus_interval(pot, SHARP_B, sharp100_curves, window, 0, 17)
    worst = 0.0
    for grid, phi, d_fh in zip(smp.grids, smp.phis, smp.d_omega_fh):
        alt = sharp_trace_derivative(grid, phi, pot, SHARP_B)
        worst = max(worst, abs(alt - d_fh) / abs(d_fh))
    report(4, "sharp trace-formula route", worst <= 0.02,
           f"worst rel={worst:.2e}")


def test_criterion_05_power_route(power100_curves):
    pot = power100_curves[0].potential
    window = EnergyWindow(0, 1.5, 1.7, SHARP_B)
    smp = ver.sample_minus_interval(pot, SHARP_B, power100_curves, window, 0, 17)
    worst = 0.0
    for grid, phi, d_fh in zip(smp.grids, smp.phis, smp.d_omega_fh):
        alt = power_derivative(grid, phi, pot, SHARP_B)
        worst = max(worst, abs(alt - d_fh) / abs(d_fh))
    report(5, "power-wall route", worst <= 0.01, f"worst rel={worst:.2e}")


def test_criterion_06_zero_net_current(sharp100_curves, power100_curves,
                                       para_curves):
    worst = 0.0
    for curves, (n, a, c) in ((sharp100_curves, (0, 1.5, 1.7)),
                              (power100_curves, (0, 1.5, 1.7)),
                              (para_curves, (0, 1.5, 2.5))):
        pot, B = curves[0].potential, curves[0].field_b
        window = EnergyWindow.for_potential(pot, B, n, a, c)
        pk = cur.build_packet(curves, window, gamma=0.0,
                              samples_per_interval=21)
        worst = max(worst, abs(cur.edge_current(pk)) / math.sqrt(B))
    report(6, "zero net current for symmetric packets", worst <= 1e-10,
           f"worst |I|/sqrt(B)={worst:.2e}")


def test_criterion_07_parabolic_bound(para_model):
    t0 = time.perf_counter()
    pot = ConfiningPotential.parabolic(PARA_G)
    k_grid = np.linspace(-7.0, 7.0, 161)
    curves = trace_curves(pot, PARA_B, 1, k_grid)
    bound_ref = cur.parabolic_bound(
        para_model, EnergyWindow.for_potential(pot, PARA_B, 0, 1.5, 2.5), 1.0)
    ok_value = abs(bound_ref - 0.42164) <= 1e-5
    ok_all = ok_value
    details = [f"bound(1,0)={bound_ref:.6f}"]
    for n in (0, 1):
        window = EnergyWindow.for_potential(pot, PARA_B, n, 1.5, 2.5)
        for gamma in (0.5, 1.0, 2.0, math.inf):
            pk = cur.build_packet(curves, window, gamma=gamma,
                                  samples_per_interval=17)
            bound = cur.parabolic_bound(para_model, window, gamma)
            ok_all &= (-cur.edge_current(pk) > bound)
    elapsed = time.perf_counter() - t0
    ok_all &= elapsed < 60.0
    details.append(f"time={elapsed:.1f}s")
    report(7, "parabolic current bound", ok_all, " ".join(details))


def test_criterion_08_sqrtb_scaling():
    b_list = [50.0, 100.0, 200.0, 400.0]
    currents = []
    samples_by_b = {}
    window0 = None
    for B in b_list:
        pot = ConfiningPotential.sharp(2 * 1.7 * B, SHARP_L)
        window = EnergyWindow(0, 1.5, 1.7, B)
        window0 = window0 or window
        k_grid = default_k_grid(pot, B, 1, 401)
        curves = trace_curves(pot, B, 0, k_grid)
        pk = cur.build_packet(curves, window, gamma=math.inf,
                              samples_per_interval=41)
        currents.append(-cur.edge_current(pk))
        smp = ver.sample_minus_interval(pot, B, curves, window, 0, 17)
        samples_by_b[B] = [smp]
    slope = float(np.polyfit(np.log(b_list), np.log(currents), 1)[0])
    cn = ver.cn_extract(samples_by_b, window0)
    ok = 0.4 <= slope <= 0.6 and cn.value > 0 and cn.residual < 0.3
    report(8, "B^(1/2) scaling of the edge current", ok,
           f"slope={slope:.3f} C0_hat={cn.value:.4f} cv={cn.residual:.3f}")


def test_criterion_09_wave_number_localization(sharp200_curves):
    window = EnergyWindow(0, 1.5, 1.7, 200.0)
    res = wave_number_check(sharp200_curves, window, alpha=3.0)
    ok = res.passed and res.worst_endpoint is not None \
        and res.worst_endpoint < -66.66
    report(9, "wave-number localization", ok,
           f"worst endpoint={res.worst_endpoint:.3f} < -66.66")


def test_criterion_10_mourre_positivity(para_model):
    pot = ConfiningPotential.parabolic(PARA_G)
    k_grid = np.linspace(-7.0, 7.0, 161)
    curves = trace_curves(pot, PARA_B, 1, k_grid)
    ok = True
    details = []
    for n in (0, 1):
        window = EnergyWindow.for_potential(pot, PARA_B, n, 1.5, 2.5)
        pk = cur.build_packet(curves, window, gamma=1.0,
                              samples_per_interval=21)
        from halledge.oracle import parabolic_kinv
        alpha = 0.5 * math.pi / parabolic_kinv(para_model, 0, n, 2.5)
        probe = cur.MourreProbe.for_packet(alpha, pk)
        form = cur.mourre_form(pk, probe)
        floor = (2 * PARA_G / math.sqrt(para_model.modified_field_bg)
                 * math.sqrt(0.5) * probe.s_constant)
        ok &= form >= floor - 1e-8
        details.append(f"n={n}: form={form:.4f} floor={floor:.4f}")
    report(10, "commutator positivity", ok, "; ".join(details))


@pytest.fixture(scope="module")
def cylinder_setup():
    pot = ConfiningPotential.sharp(SHARP_V0, SHARP_L)
    geom = cyl.CylinderGeometry(1.0, pot, SHARP_B)
    window = EnergyWindow(0, 1.3, 2.2, SHARP_B)
    spectrum = cyl.assemble_spectrum(geom, 1, window)
    return geom, window, spectrum


def test_criterion_11_cylinder_identities(cylinder_setup):
    geom, window, spectrum = cylinder_setup
    pk = cyl.build_cylinder_packet(spectrum, 2.0)
    total = cyl.packet_current(spectrum, pk)
    resummed = math.fsum(b * b * spectrum.entries[mp].current
                         for mp, b in sorted(pk.coeffs.items(), reverse=True))
    ok_sum = abs(total - resummed) <= 1e-12
    ok_mirror = True
    for (m, p), e in spectrum.entries.items():
        if p > 0 and (m, -p) in spectrum.entries:
            other = spectrum.entries[(m, -p)].current
            ok_mirror &= abs(e.current + other) <= 1e-8
    res = cyl.perturbed_cylinder_project(geom, [], window, resolution=201,
                                         packet_gamma=math.inf)
    worst_move = max(mv["moved"] for mv in res.movements)
    ok_zero = worst_move <= 1e-8
    report(11, "cylinder identities", ok_sum and ok_mirror and ok_zero,
           f"resum={abs(total - resummed):.1e} worst V1=0 move={worst_move:.1e}")


def test_criterion_12_perturbed_cylinder(cylinder_setup):
    geom, window, spectrum = cylinder_setup
    t0 = time.perf_counter()
    eps = 0.05 * SHARP_B
    pert = [cyl.HarmonicPerturbation("cos", 1,
                                     cyl.strip_bump_profile(eps, SHARP_L))]
    res = cyl.perturbed_cylinder_project(geom, pert, window, resolution=401,
                                         packet_gamma=math.inf)
    elapsed = time.perf_counter() - t0
    worst_move = max(mv["moved"] for mv in res.movements)
    kept = res.projected_current / res.unperturbed_current
    ok = (worst_move <= res.v1_sup + 1e-9
          and res.projected_current < 0
          and abs(res.projected_current) >= 0.5 * abs(res.unperturbed_current)
          and elapsed < 600.0)
    report(12, "perturbed cylinder stability", ok,
           f"move={worst_move:.4f}<= {res.v1_sup:.1f}, kept={kept:.3f}, "
           f"time={elapsed:.0f}s")


def test_criterion_13_appendix_scaling(power_curves_by_b, sharp200_curves):
    b_list = [100.0, 200.0, 400.0]
    k_by_b = {}
    for B in b_list:
        win = EnergyWindow(0, 1.5, 1.7, B)
        image = inverse_image(power_curves_by_b[B][0], win)
        k_by_b[B] = image.minus_interval[0]
    ok = True
    details = []
    for m in (0, 1, 2):
        const, verdict = ver.ipm_scaling_check(m, POWER_P, b_list, SHARP_L,
                                               k_by_b)
        ok &= verdict.status == ver.PASS and const.value <= -1.4
        details.append(f"m={m}: slope={const.value:.3f}")
    # forbidden-zone decay and midline trace at B = 200
    pot = sharp200_curves[0].potential
    win200 = EnergyWindow(0, 1.5, 1.7, 200.0)
    smp = ver.sample_minus_interval(pot, 200.0, sharp200_curves, win200, 0, 5)
    for k, om, grid, phi in zip(smp.k, smp.omega, smp.grids, smp.phis):
        x = grid.points()
        W = ver.effective_forbidden_potential(pot, 200.0, float(k), float(om), x)
        v1 = ver.forbidden_decay_check(grid, phi, W, -SHARP_L / 6.0)
        v2 = ver.trace_bound_check(grid, phi, 200.0, SHARP_L, float(om), pot,
                                   float(k))
        ok &= v1.status == ver.PASS and v1.margin > 0
        ok &= v2.status == ver.PASS and v2.margin > 0
    report(13, "tail scaling and forbidden-zone bounds", ok,
           "; ".join(details))


DETERMINISM_TOML = """
[potential]
kind = "sharp"
scaled_v0 = true
L = 1.0

[field]
B = 50.0

[window]
n = 0
a = 1.5
c = 1.7

[solver]
k_samples = 101

[verify]
B_list = [50.0]
checks = ["routes"]

[output]
directory = "{out}"
"""


def test_criterion_14_determinism(tmp_path):
    outs = []
    for run in ("first", "second"):
        out = tmp_path / run
        cfg = tmp_path / f"{run}.toml"
        cfg.write_text(DETERMINISM_TOML.format(out=out))
        rc = cli_main(["verify", "--config", str(cfg)])
        assert rc == 0
        outs.append(out)
    same = True
    for name in ("verdicts.jsonl", "verdicts.csv", "constants.json"):
        same &= (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    report(14, "byte-identical repeated verify runs", same)
