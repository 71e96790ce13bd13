"""Command-line front end: config-driven sweeps with CSV/JSON outputs.

Subcommands: dispersion, current, cylinder, verify, scaling.
Exit codes: 0 all checks passed, 1 a check failed, 2 invalid config.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import current as cur
from . import cylinder as cyl
from . import dispersion as disp
from . import reporting as rep
from . import verify as ver
from .config import ConfigError, RunConfig, load_config
from .fiber import GridPolicy
from .oracle import ParabolicModel
from .potentials import PARABOLIC, SHARP


def _policy(cfg: RunConfig) -> GridPolicy:
    s = cfg.solver
    return GridPolicy(n_points=s.grid_points or None,
                      target_spacing=s.target_spacing,
                      floor_points=s.floor_points, cap_points=s.cap_points,
                      pad_sigmas=s.pad_sigmas)


def _bands(cfg: RunConfig) -> int:
    return cfg.solver.bands or (cfg.window.n + 1)


def _tag(pot, B: float) -> str:
    return f"{pot.kind}_B{B:g}".replace(".", "p")


def _setup(cfg: RunConfig, B: float):
    pot = cfg.potential.resolve(B, cfg.window.n, cfg.window.c)
    window = disp.EnergyWindow.for_potential(pot, B, cfg.window.n,
                                             cfg.window.a, cfg.window.c)
    k_grid = disp.default_k_grid(pot, B, cfg.window.n + 1, cfg.solver.k_samples)
    return pot, window, k_grid


def cmd_dispersion(cfg: RunConfig) -> int:
    out = rep.ensure_dir(cfg.out_dir)
    policy = _policy(cfg)
    failed = False
    summary = {"runs": []}
    for B in cfg.b_values():
        pot, window, k_grid = _setup(cfg, B)
        curves = disp.trace_curves(pot, B, _bands(cfg) - 1, k_grid,
                                   policy=policy, threads=cfg.threads)
        tag = _tag(pot, B)
        header, rows = rep.curves_csv_rows(curves)
        csv_name = f"curves_{tag}.csv"
        rep.write_csv(os.path.join(out, csv_name), header, rows)
        rep.write_text(os.path.join(out, f"curves_{tag}.gp"),
                       rep.gnuplot_curves_script(csv_name, len(curves),
                                                 f"dispersion {tag}"))
        images = [disp.inverse_image(c, window) for c in curves[:window.level_n + 1]]
        gap = disp.gap_test(curves, window)
        entry = {
            "B": rep.tagged(B, "energy"),
            "potential": pot.describe(),
            "window": window.describe(),
            "inverse_images": [
                {"band": im.band_index_j,
                 "minus": list(im.minus_interval) if im.minus_interval else None,
                 "plus": list(im.plus_interval) if im.plus_interval else None}
                for im in images],
            "gap_test": {"pass": gap.passed, "d_n": gap.gap_d_n,
                         "window_width": gap.window_width,
                         "images_disjoint": gap.images_disjoint},
            "asymptotes": [vars(disp.asymptote_check(c, pot)) for c in curves],
        }
        if pot.is_wall:
            wn = disp.wave_number_check(curves, window, alpha=3.0)
            entry["wave_number_check"] = {"pass": wn.passed,
                                          "threshold": wn.threshold,
                                          "worst_endpoint": wn.worst_endpoint}
            failed |= not wn.passed
        failed |= not gap.passed
        summary["runs"].append(entry)
    summary["units"] = {"B": "energy", "omega": "energy", "k": "1/length",
                        "d_omega": "energy*length", "d_n": "energy",
                        "intervals": "1/length"}
    rep.write_json(os.path.join(out, "dispersion_summary.json"), summary)
    return 1 if failed else 0


def cmd_current(cfg: RunConfig) -> int:
    out = rep.ensure_dir(cfg.out_dir)
    policy = _policy(cfg)
    # a seed switches on profile jitter: the current laws must not depend
    # on the exact bump shape
    rng = np.random.default_rng(cfg.seed) if cfg.seed is not None else None
    records = []
    failed = False
    for B in cfg.b_values():
        pot, window, k_grid = _setup(cfg, B)
        curves = disp.trace_curves(pot, B, _bands(cfg) - 1, k_grid,
                                   policy=policy, threads=cfg.threads)
        packet = cur.build_packet(curves, window, cfg.packet.profile,
                                  cfg.packet.gamma,
                                  cfg.packet.samples_per_interval,
                                  policy=policy, rng=rng)
        bound = None
        if pot.kind == PARABOLIC:
            model = ParabolicModel(B, pot.stiffness_g)
            bound = cur.parabolic_bound(model, window, cfg.packet.gamma)
        record = cur.current_report(packet, bound=bound)
        record["current"] = rep.tagged(record["current"], "energy*length")
        if bound is not None and not record["pass"]:
            failed = True
        if cfg.perturbation is not None and cfg.window.a_outer is not None:
            budget = cur.PerturbationBudget(
                outer_a=cfg.window.a_outer, outer_c=cfg.window.c_outer,
                v1_ratio=cfg.perturbation.amplitude_ratio,
                fitted_cn=0.0, gamma=cfg.packet.gamma)
            record["perturbation_margin"] = cur.perturbation_margin(
                budget, window, B)
        records.append(record)
    report = {"records": records,
              "units": {"current": "energy*length",
                        "current_per_sqrtB": "energy*length/sqrt(energy)",
                        "bound": "energy*length", "B": "energy"}}
    if len(records) > 1:
        bs = cfg.b_values()
        cur_vals = [-(r["current"]["value"]) for r in records]
        slope = float(np.polyfit(np.log(bs), np.log(cur_vals), 1)[0])
        report["scaling_slope"] = slope
    rep.write_json(os.path.join(out, "current_report.json"), report)
    return 1 if failed else 0


def cmd_cylinder(cfg: RunConfig) -> int:
    out = rep.ensure_dir(cfg.out_dir)
    failed = False
    if cfg.geometry != "cylinder":
        raise ConfigError("cylinder command needs geometry.kind = 'cylinder'")
    B = cfg.b_values()[0]
    pot = cfg.potential.resolve(B, cfg.window.n, cfg.window.c)
    if pot.kind != SHARP:
        raise ConfigError("cylinder runs require the sharp wall")
    window = disp.EnergyWindow.for_potential(pot, B, cfg.window.n,
                                             cfg.window.a, cfg.window.c)
    geom = cyl.CylinderGeometry(cfg.cylinder.D, pot, B)
    spectrum = cyl.assemble_spectrum(geom, cfg.cylinder.m_max, window,
                                     policy=_policy(cfg))
    header, rows = rep.spectrum_csv_rows(spectrum)
    rep.write_csv(os.path.join(out, "spectrum.csv"), header, rows)

    packet = cyl.build_cylinder_packet(spectrum, cfg.packet.gamma)
    sym_packet = cyl.build_cylinder_packet(spectrum, 0.0)
    summary = {
        "B": rep.tagged(B, "energy"),
        "D": rep.tagged(geom.circumference_d, "length"),
        "window": window.describe(),
        "p_star": spectrum.p_star,
        "in_window_count": len(spectrum.in_window_entries()),
        "packet_gamma": cfg.packet.gamma,
        "packet_current": rep.tagged(cyl.packet_current(spectrum, packet),
                                     "energy*length"),
        "symmetric_packet_current": rep.tagged(
            cyl.packet_current(spectrum, sym_packet), "energy*length"),
    }
    if cfg.perturbation is not None:
        eps = cfg.perturbation.amplitude_ratio * B
        harmonics = [cyl.HarmonicPerturbation(
            cfg.perturbation.kind, cfg.perturbation.harmonic,
            cyl.strip_bump_profile(eps, pot.half_width_l))]
        outer = None
        if cfg.window.a_outer is not None:
            outer = (cfg.window.a_outer, cfg.window.c_outer)
        result = cyl.perturbed_cylinder_project(
            geom, harmonics, window, outer=outer,
            resolution=cfg.cylinder.resolution,
            packet_gamma=cfg.packet.gamma,
            p_margin=cfg.cylinder.p_margin, dim_cap=cfg.cylinder.dim_cap)
        moved = max((m["moved"] for m in result.movements), default=0.0)
        kept = (result.projected_current / result.unperturbed_current
                if result.unperturbed_current else math.nan)
        summary["perturbed"] = {
            "v1_sup": result.v1_sup,
            "eigenvalues_in_window": [float(v) for v in result.eigenvalues],
            "max_eigenvalue_move": moved,
            "move_within_v1_sup": bool(moved <= result.v1_sup + 1e-9 * B),
            "unperturbed_current": result.unperturbed_current,
            "projected_current": result.projected_current,
            "current_ratio": kept,
            "norm_retention": result.norm_retention,
        }
        failed |= not summary["perturbed"]["move_within_v1_sup"]
        rep.write_json(os.path.join(out, "perturbed_cylinder.json"),
                       {"movements": result.movements,
                        "eigenvalues": [float(v) for v in result.eigenvalues],
                        "units": {"eigenvalues": "energy", "moved": "energy"}})
    summary["units"] = {"B": "energy", "D": "length", "omega": "energy",
                        "current": "energy*length", "k_p": "1/length"}
    rep.write_json(os.path.join(out, "cylinder_summary.json"), summary)
    return 1 if failed else 0


def cmd_scaling(cfg: RunConfig) -> int:
    out = rep.ensure_dir(cfg.out_dir)
    policy = _policy(cfg)
    bs = cfg.verify.scaling_b_list if cfg.B_list is None else cfg.b_values()
    rows = []
    samples_by_b = {}
    for B in bs:
        pot, window, k_grid = _setup(cfg, B)
        curves = disp.trace_curves(pot, B, _bands(cfg) - 1, k_grid,
                                   policy=policy, threads=cfg.threads)
        packet = cur.build_packet(curves, window, cfg.packet.profile,
                                  cfg.packet.gamma,
                                  cfg.packet.samples_per_interval,
                                  policy=policy)
        samples = []
        for j in range(window.level_n + 1):
            smp = ver.sample_minus_interval(pot, B, curves, window, j,
                                            cfg.solver.m_samples, policy=policy)
            if smp is not None:
                samples.append(smp)
        samples_by_b[B] = samples
        rows.append([B, cur.edge_current(packet),
                     cur.edge_current(packet) / math.sqrt(B)])
    rep.write_csv(os.path.join(out, "scaling.csv"),
                  ["B", "current", "current_per_sqrtB"], rows)
    rep.write_text(os.path.join(out, "scaling.gp"),
                   rep.gnuplot_scaling_script("scaling.csv", "B^(1/2) scaling"))
    slope = float(np.polyfit(np.log(bs), np.log([-r[1] for r in rows]), 1)[0])
    cn = ver.cn_extract(samples_by_b, disp.EnergyWindow.for_potential(
        cfg.potential.resolve(bs[0], cfg.window.n, cfg.window.c), bs[0],
        cfg.window.n, cfg.window.a, cfg.window.c))
    report = {
        "B_list": list(bs),
        "slope": slope,
        "slope_in_band": bool(0.4 <= slope <= 0.6),
        "C_n_hat": {"value": cn.value, "cv": cn.residual,
                    "per_B": cn.detail["per_B"]},
        "units": {"B": "energy", "current": "energy*length",
                  "slope": "dimensionless"},
    }
    rep.write_json(os.path.join(out, "scaling_report.json"), report)
    return 0 if report["slope_in_band"] and cn.value > 0 else 1


def cmd_verify(cfg: RunConfig) -> int:
    from .battery import run_battery
    out = rep.ensure_dir(cfg.out_dir)
    verdicts, constants = run_battery(cfg)
    rep.write_jsonl(os.path.join(out, "verdicts.jsonl"),
                    [v.as_record() for v in verdicts])
    rep.write_csv(os.path.join(out, "verdicts.csv"),
                  ["check", "status", "margin", "detail"],
                  [[v.check, v.status, v.margin, v.detail.replace(",", ";")]
                   for v in verdicts])
    rep.write_json(os.path.join(out, "constants.json"),
                   {c.name: {"value": c.value, "fit_range": c.fit_range,
                             "residual": c.residual} for c in constants})
    n_fail = sum(1 for v in verdicts if v.status == ver.FAIL)
    n_pre = sum(1 for v in verdicts if v.status == ver.PRECONDITION)
    print(f"verify: {len(verdicts)} checks, {n_fail} failed, "
          f"{n_pre} precondition-not-met")
    return 1 if n_fail else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="halledge",
        description="edge currents in two-edge quantum Hall geometries")
    parser.add_argument("command",
                        choices=["dispersion", "current", "cylinder",
                                 "verify", "scaling"])
    parser.add_argument("--config", required=True, help="TOML config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, help="parallel fiber solves")
    parser.add_argument("--seed", type=int,
                        help="rng seed for packet profile jitter tests")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.out_dir = args.out
        if args.threads:
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        handler = {"dispersion": cmd_dispersion, "current": cmd_current,
                   "cylinder": cmd_cylinder, "verify": cmd_verify,
                   "scaling": cmd_scaling}[args.command]
        return handler(cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except disp.AmbiguousInversionError as exc:
        print(f"inversion error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
