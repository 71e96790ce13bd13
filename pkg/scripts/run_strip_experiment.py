#!/usr/bin/env python3
"""Strip pipeline end to end: curves, inverse images, packet current.

Runs the sharp-wall strip at B = 100 with the window-scaled wall and a
fully left-weighted packet, then prints the current against the raw
sqrt(B) scale.  Outputs land in out/strip_sharp_b100/.
"""

import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from halledge.cli import cmd_current, cmd_dispersion
from halledge.config import load_config

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "strip_sharp_b100.toml")


def main():
    cfg = load_config(CONFIG)
    rc = cmd_dispersion(cfg)
    rc |= cmd_current(cfg)
    import json
    with open(os.path.join(cfg.out_dir, "current_report.json")) as f:
        report = json.load(f)
    rec = report["records"][0]
    cur = rec["current"]["value"]
    print(f"edge current = {cur:.6f}  ({cur / math.sqrt(100.0):.6f} in sqrt(B) units)")
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
