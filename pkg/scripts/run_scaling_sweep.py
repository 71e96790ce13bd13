#!/usr/bin/env python3
"""Sweep B in {50, 100, 200, 400} and fit the edge-current scaling slope.

The left-weighted packet current of the sharp wall should grow like
B^{1/2}; the script also extracts the empirical slope-floor constant.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from halledge.cli import cmd_scaling
from halledge.config import load_config

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "scaling_sweep.toml")


def main():
    cfg = load_config(CONFIG)
    rc = cmd_scaling(cfg)
    with open(os.path.join(cfg.out_dir, "scaling_report.json")) as f:
        report = json.load(f)
    print(f"log-log slope = {report['slope']:.4f} (target 0.5)")
    print(f"C_hat = {report['C_n_hat']['value']:.4f} "
          f"(cv = {report['C_n_hat']['cv']:.3f})")
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
