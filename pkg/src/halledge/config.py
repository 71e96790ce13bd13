"""Run configuration: TOML file plus command-line overrides.

Unknown keys are rejected and numeric fields are validated against their
documented ranges before anything runs.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .potentials import ConfiningPotential


class ConfigError(ValueError):
    pass


def _take(section: dict, name: str, keys: dict):
    """Pop known keys with defaults; reject anything unrecognized."""
    extra = set(section) - set(keys)
    if extra:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")
    return {k: section.get(k, default) for k, default in keys.items()}


def _parse_gamma(value) -> float:
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigError(f"gamma must be a number or 'inf', got {value!r}")
    g = float(value)
    if g < 0:
        raise ConfigError("gamma must be nonnegative")
    return g


@dataclass
class PotentialConfig:
    kind: str = "sharp"
    v0: float | None = None
    scaled_v0: bool = False
    coupling: float = 1.0
    L: float = 1.0
    p: float = 2.0
    g: float = 4.0

    def resolve(self, B: float, n: int, c: float) -> ConfiningPotential:
        """Concrete potential, applying the window-scaled wall rule if asked.

        scaled_v0 picks V0 = coupling * 2 (2n+c) B for the sharp wall and
        V0 = coupling * (2n+c) B^{(p+2)/2} for the power wall.
        """
        if self.kind == "free":
            return ConfiningPotential.free()
        if self.kind == "parabolic":
            return ConfiningPotential.parabolic(self.g)
        if self.kind == "sharp":
            v0 = self.v0
            if self.scaled_v0 or v0 is None:
                v0 = self.coupling * 2.0 * (2 * n + c) * B
            return ConfiningPotential.sharp(v0, self.L)
        if self.kind == "power":
            v0 = self.v0
            if self.scaled_v0 or v0 is None:
                v0 = self.coupling * (2 * n + c) * B ** ((self.p + 2.0) / 2.0)
            return ConfiningPotential.power(v0, self.L, self.p)
        raise ConfigError(f"unknown potential kind {self.kind!r}")


@dataclass
class WindowConfig:
    n: int = 0
    a: float = 1.5
    c: float = 1.7
    a_outer: float | None = None
    c_outer: float | None = None


@dataclass
class PacketConfig:
    profile: str = "cosine-bump"
    gamma: float = math.inf
    samples_per_interval: int = 41
    jitter: bool = False


@dataclass
class SolverConfig:
    grid_points: int = 0          # 0 -> adaptive spacing policy
    target_spacing: float = 4.0e-4
    floor_points: int = 4001
    cap_points: int = 24001
    k_samples: int = 401
    pad_sigmas: float = 8.0
    bands: int = 0                # 0 -> window n + 1
    m_samples: int = 17


@dataclass
class CylinderConfig:
    D: float = 1.0
    m_max: int = 1
    resolution: int = 401
    p_margin: int = 3
    dim_cap: int = 26000


@dataclass
class PerturbationConfig:
    amplitude_ratio: float = 0.05   # sup |V1| = ratio * B
    harmonic: int = 1
    kind: str = "cos"
    y_decay_sup: float | None = None  # ||y V1||_inf for the decaying class


@dataclass
class VerifyConfig:
    b_list: list = field(default_factory=lambda: [100.0, 200.0])
    scaling_b_list: list = field(default_factory=lambda: [50.0, 100.0, 200.0, 400.0])
    checks: list = field(default_factory=lambda: ["all"])


@dataclass
class RunConfig:
    potential: PotentialConfig
    window: WindowConfig
    packet: PacketConfig
    solver: SolverConfig
    cylinder: CylinderConfig
    perturbation: PerturbationConfig | None
    verify: VerifyConfig
    B: float | None
    B_list: list | None
    geometry: str = "strip"
    out_dir: str = "out"
    threads: int = 1
    seed: int | None = None

    def b_values(self) -> list[float]:
        if self.B_list:
            return list(self.B_list)
        if self.B is not None:
            return [self.B]
        raise ConfigError("config must set field.B or field.B_list")


def load_config(path: str) -> RunConfig:
    with open(path, "rb") as f:
        try:
            raw = tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    known_sections = {"potential", "field", "window", "geometry", "packet",
                      "solver", "cylinder", "perturbation", "verify",
                      "output", "run"}
    extra = set(raw) - known_sections
    if extra:
        raise ConfigError(f"unknown config sections: {sorted(extra)}")

    pot_raw = _take(raw.get("potential", {}), "potential", {
        "kind": "sharp", "v0": None, "scaled_v0": False, "coupling": 1.0,
        "L": 1.0, "p": 2.0, "g": 4.0})
    if pot_raw["kind"] not in ("sharp", "power", "parabolic", "free"):
        raise ConfigError(f"unknown potential kind {pot_raw['kind']!r}")
    if pot_raw["L"] <= 0:
        raise ConfigError("potential.L must be positive")
    if pot_raw["kind"] == "power" and pot_raw["p"] <= 1:
        raise ConfigError("potential.p must exceed 1")
    if pot_raw["kind"] == "parabolic" and pot_raw["g"] <= 0:
        raise ConfigError("potential.g must be positive")
    potential = PotentialConfig(**{k: pot_raw[k] for k in pot_raw})

    field_raw = _take(raw.get("field", {}), "field", {"B": None, "B_list": None})
    B = field_raw["B"]
    b_list = field_raw["B_list"]
    if B is not None and B <= 0:
        raise ConfigError("field.B must be positive")
    if b_list is not None and (not b_list or any(b <= 0 for b in b_list)):
        raise ConfigError("field.B_list must be a nonempty list of positive values")

    win_raw = _take(raw.get("window", {}), "window", {
        "n": 0, "a": 1.5, "c": 1.7, "a_outer": None, "c_outer": None})
    if win_raw["n"] < 0:
        raise ConfigError("window.n must be nonnegative")
    if not (1.0 < win_raw["a"] < win_raw["c"] < 3.0):
        raise ConfigError("window must satisfy 1 < a < c < 3")
    if (win_raw["a_outer"] is None) != (win_raw["c_outer"] is None):
        raise ConfigError("window.a_outer and window.c_outer come together")
    if win_raw["a_outer"] is not None and not (
            1.0 < win_raw["a_outer"] < win_raw["a"]
            and win_raw["c"] < win_raw["c_outer"] < 3.0):
        raise ConfigError("outer window must satisfy 1 < a_outer < a < c < c_outer < 3")
    window = WindowConfig(**win_raw)

    geo_raw = _take(raw.get("geometry", {}), "geometry", {"kind": "strip", "D": 1.0})
    if geo_raw["kind"] not in ("strip", "cylinder"):
        raise ConfigError("geometry.kind must be 'strip' or 'cylinder'")
    if geo_raw["D"] <= 0:
        raise ConfigError("geometry.D must be positive")

    pk_raw = _take(raw.get("packet", {}), "packet", {
        "profile": "cosine-bump", "gamma": "inf",
        "samples_per_interval": 41, "jitter": False})
    if pk_raw["profile"] not in ("flat", "cosine-bump"):
        raise ConfigError("packet.profile must be 'flat' or 'cosine-bump'")
    if pk_raw["samples_per_interval"] < 3:
        raise ConfigError("packet.samples_per_interval must be >= 3")
    packet = PacketConfig(profile=pk_raw["profile"],
                          gamma=_parse_gamma(pk_raw["gamma"]),
                          samples_per_interval=pk_raw["samples_per_interval"],
                          jitter=bool(pk_raw["jitter"]))

    sol_raw = _take(raw.get("solver", {}), "solver", {
        "grid_points": 0, "target_spacing": 4.0e-4, "floor_points": 4001,
        "cap_points": 24001, "k_samples": 401, "pad_sigmas": 8.0,
        "bands": 0, "m_samples": 17})
    for key in ("grid_points", "floor_points", "cap_points", "k_samples",
                "bands", "m_samples"):
        if sol_raw[key] < 0:
            raise ConfigError(f"solver.{key} must be nonnegative")
    if sol_raw["target_spacing"] <= 0 or sol_raw["pad_sigmas"] <= 0:
        raise ConfigError("solver spacing/padding must be positive")
    solver = SolverConfig(**sol_raw)

    cyl_raw = _take(raw.get("cylinder", {}), "cylinder", {
        "m_max": 1, "resolution": 401, "p_margin": 3, "dim_cap": 26000})
    cylinder = CylinderConfig(D=geo_raw["D"], **cyl_raw)

    pert = None
    if "perturbation" in raw:
        p_raw = _take(raw["perturbation"], "perturbation", {
            "amplitude_ratio": 0.05, "harmonic": 1, "kind": "cos",
            "y_decay_sup": None})
        if p_raw["amplitude_ratio"] < 0:
            raise ConfigError("perturbation.amplitude_ratio must be nonnegative")
        if p_raw["harmonic"] < 1:
            raise ConfigError("perturbation.harmonic must be >= 1")
        if p_raw["kind"] not in ("cos", "sin"):
            raise ConfigError("perturbation.kind must be 'cos' or 'sin'")
        pert = PerturbationConfig(**p_raw)

    ver_raw = _take(raw.get("verify", {}), "verify", {
        "B_list": [100.0, 200.0],
        "scaling_B_list": [50.0, 100.0, 200.0, 400.0],
        "checks": ["all"]})
    if not ver_raw["checks"]:
        raise ConfigError("verify.checks must not be empty")
    verify = VerifyConfig(b_list=list(ver_raw["B_list"]),
                          scaling_b_list=list(ver_raw["scaling_B_list"]),
                          checks=list(ver_raw["checks"]))

    out_raw = _take(raw.get("output", {}), "output", {"directory": "out"})
    run_raw = _take(raw.get("run", {}), "run", {"threads": 1, "seed": None})
    if run_raw["threads"] < 1:
        raise ConfigError("run.threads must be >= 1")

    return RunConfig(potential=potential, window=window, packet=packet,
                     solver=solver, cylinder=cylinder, perturbation=pert,
                     verify=verify, B=B, B_list=b_list,
                     geometry=geo_raw["kind"], out_dir=out_raw["directory"],
                     threads=run_raw["threads"], seed=run_raw["seed"])
