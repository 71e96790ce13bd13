"""Deterministic CSV/JSON/JSONL writers and gnuplot script emission.

Numbers are formatted with 17 significant digits, '.' decimal separator
and LF line endings, so identical runs produce byte-identical files.
Physical quantities in JSON reports carry a unit tag.
"""

from __future__ import annotations

import json
import math
import os
from typing import Iterable


def fmt(x) -> str:
    """17-significant-digit representation (round-trips float64)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    xf = float(x)
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    if math.isnan(xf):
        return "nan"
    return f"{xf:.17g}"


def tagged(value, unit: str) -> dict:
    """Unit-tagged JSON number."""
    v = float(value)
    if math.isinf(v) or math.isnan(v):
        v = str(v)
    return {"value": v, "unit": unit}


def _sanitize(obj):
    """Make inf/nan JSON-safe (encoded as strings) recursively."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and (math.isinf(obj) or math.isnan(obj)):
        return str(obj)
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        try:
            return _sanitize(obj.item())
        except (AttributeError, ValueError):
            return obj
    return obj


def write_json(path: str, obj: dict) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(_sanitize(obj), f, indent=2, allow_nan=False)
        f.write("\n")


def write_jsonl(path: str, records: Iterable[dict]) -> None:
    with open(path, "w", newline="\n") as f:
        for rec in records:
            json.dump(_sanitize(rec), f, allow_nan=False)
            f.write("\n")


def write_csv(path: str, header: list[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) if not isinstance(v, str) else v
                             for v in row) + "\n")


def curves_csv_rows(curves) -> tuple[list[str], list[list]]:
    """Wide table: k then per-band omega and both derivative routes."""
    header = ["k"]
    for c in curves:
        j = c.band_index_j
        header += [f"omega_{j}", f"d_omega_fh_{j}", f"d_omega_fd_{j}"]
    rows = []
    for i in range(curves[0].k_samples.size):
        row = [curves[0].k_samples[i]]
        for c in curves:
            row += [c.omega[i], c.d_omega_fh[i], c.d_omega_fd[i]]
        rows.append(row)
    return header, rows


def spectrum_csv_rows(spectrum) -> tuple[list[str], list[list]]:
    header = ["m", "p", "k_p", "omega", "current", "in_window"]
    rows = []
    for (m, p) in sorted(spectrum.entries):
        e = spectrum.entries[(m, p)]
        rows.append([m, p, e.k_p, e.omega, e.current,
                     "1" if e.in_window else "0"])
    return header, rows


def gnuplot_curves_script(csv_name: str, n_bands: int, title: str) -> str:
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set xlabel 'k'",
        "set ylabel 'omega_j(k)'",
        "set key left top",
    ]
    plots = [f"'{csv_name}' using 1:{2 + 3 * j} with lines title 'band {j}'"
             for j in range(n_bands)]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def gnuplot_scaling_script(csv_name: str, title: str) -> str:
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set logscale xy",
        "set xlabel 'B'",
        "set ylabel '-current'",
        f"plot '{csv_name}' using 1:(-$2) with linespoints title 'edge current'",
    ]
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(text)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
