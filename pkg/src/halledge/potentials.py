"""Confining wall profiles for the strip and cylinder geometries.

All potentials are even, nonnegative and nondecreasing away from the
origin.  The sharp and power walls vanish on the open strip |x| < L/2;
the parabolic channel and the free (zero) potential ignore the strip
parameters entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SHARP = "sharp"
POWER = "power"
PARABOLIC = "parabolic"
FREE = "free"

_KINDS = (SHARP, POWER, PARABOLIC, FREE)

# Relative slack used to decide that a sample sits exactly on the wall.
_WALL_SNAP_RTOL = 1e-12


@dataclass(frozen=True)
class ConfiningPotential:
    """Even confining wall V0(x) with its limit C at infinity.

    Attributes
    ----------
    kind : str
        One of "sharp", "power", "parabolic", "free".
    strength_v0 : float
        Barrier scale (sharp step height / power prefactor).  Unused for
        the parabolic and free variants.
    half_width_l : float
        Strip half-width parameter L; walls sit at x = +-L/2.
    exponent_p : float
        Wall exponent (> 1), power variant only.
    stiffness_g : float
        Parabolic stiffness g (> 0), parabolic variant only.
    limit_at_infinity : float
        C = lim V0(x); finite for sharp, inf for power/parabolic, 0 for free.
    """

    kind: str
    strength_v0: float = 0.0
    half_width_l: float = 0.0
    exponent_p: float = 0.0
    stiffness_g: float = 0.0
    limit_at_infinity: float = math.inf

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind in (SHARP, POWER):
            if self.strength_v0 < 0:
                raise ValueError("wall strength must be nonnegative")
            if self.half_width_l <= 0:
                raise ValueError("strip width L must be positive")
        if self.kind == POWER and self.exponent_p <= 1:
            raise ValueError("power wall exponent must exceed 1")
        if self.kind == PARABOLIC and self.stiffness_g <= 0:
            raise ValueError("parabolic stiffness must be positive")

    @classmethod
    def sharp(cls, v0: float, L: float) -> "ConfiningPotential":
        return cls(SHARP, strength_v0=v0, half_width_l=L, limit_at_infinity=v0)

    @classmethod
    def power(cls, v0: float, L: float, p: float) -> "ConfiningPotential":
        return cls(POWER, strength_v0=v0, half_width_l=L, exponent_p=p,
                   limit_at_infinity=math.inf)

    @classmethod
    def parabolic(cls, g: float) -> "ConfiningPotential":
        return cls(PARABOLIC, stiffness_g=g, limit_at_infinity=math.inf)

    @classmethod
    def free(cls) -> "ConfiningPotential":
        return cls(FREE, limit_at_infinity=0.0)

    @property
    def is_wall(self) -> bool:
        """True when the potential has actual walls at +-L/2."""
        return self.kind in (SHARP, POWER)

    def evaluate(self, x):
        """V0(x) for a scalar or array argument.

        The sharp step is sampled with the midpoint convention: a point
        lying exactly on |x| = L/2 gets the value V0/2, which keeps the
        discretized step second-order consistent.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == FREE:
            v = np.zeros_like(x)
        elif self.kind == PARABOLIC:
            v = self.stiffness_g**2 * x**2
        else:
            half = self.half_width_l / 2.0
            dist = np.abs(x) - half
            on_wall = np.abs(dist) <= _WALL_SNAP_RTOL * max(1.0, half)
            if self.kind == SHARP:
                v = np.where(dist > 0, self.strength_v0, 0.0)
                v = np.where(on_wall, self.strength_v0 / 2.0, v)
            else:
                v = np.where(dist > 0, self.strength_v0 * np.maximum(dist, 0.0) ** self.exponent_p, 0.0)
                v = np.where(on_wall, 0.0, v)
        return v if v.ndim else float(v)

    def smooth_derivative(self, x):
        """Pointwise V0'(x), or None when only a distributional derivative exists.

        The sharp wall differentiates to boundary deltas, so callers must
        take the boundary-trace route instead; this is signalled by None.
        """
        if self.kind == SHARP:
            return None
        x = np.asarray(x, dtype=float)
        if self.kind == FREE:
            d = np.zeros_like(x)
        elif self.kind == PARABOLIC:
            d = 2.0 * self.stiffness_g**2 * x
        else:
            half = self.half_width_l / 2.0
            dist = np.abs(x) - half
            mag = self.exponent_p * self.strength_v0 * np.maximum(dist, 0.0) ** (self.exponent_p - 1.0)
            d = np.where(dist > 0, np.sign(x) * mag, 0.0)
        return d if d.ndim else float(d)

    def describe(self) -> dict:
        """JSON-friendly parameter summary."""
        out = {"kind": self.kind}
        if self.kind in (SHARP, POWER):
            out["v0"] = self.strength_v0
            out["L"] = self.half_width_l
        if self.kind == POWER:
            out["p"] = self.exponent_p
        if self.kind == PARABOLIC:
            out["g"] = self.stiffness_g
        out["limit_at_infinity"] = self.limit_at_infinity
        return out
