#!/usr/bin/env python3
"""Cylinder run: discrete spectrum, packet current, perturbed comparison.

Solves the D = 1 cylinder at B = 100, prints the in-window modes and the
current kept by the left packet after a 0.05 B harmonic perturbation.
This is the slow demo (a dense block eigensolve); expect a few minutes.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from halledge.cli import cmd_cylinder
from halledge.config import load_config

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "cylinder_b100.toml")


def main():
    cfg = load_config(CONFIG)
    rc = cmd_cylinder(cfg)
    with open(os.path.join(cfg.out_dir, "cylinder_summary.json")) as f:
        summary = json.load(f)
    print(f"p_star = {summary['p_star']}, "
          f"in-window modes = {summary['in_window_count']}")
    print(f"packet current = {summary['packet_current']['value']:.6f}")
    pert = summary.get("perturbed")
    if pert:
        print(f"perturbed: max eigenvalue move = {pert['max_eigenvalue_move']:.4f} "
              f"(sup V1 = {pert['v1_sup']:.1f}), "
              f"current ratio kept = {pert['current_ratio']:.4f}")
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
