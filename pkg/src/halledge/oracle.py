"""Closed-form references: Hermite functions and the solvable parabolic channel.

The parabolic channel reduces to a shifted harmonic oscillator with
modified field strength B_g = sqrt(B^2 + g^2), so its bands,
eigenfunctions and window inverse images are all available in closed
form and serve as the primary solver oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Double-precision Hermite recurrence is comfortably accurate up to here;
# the artifact never asks for higher bands.
MAX_HERMITE_INDEX = 12


def hermite(m: int, u):
    """Physicists' Hermite polynomial H_m(u) by the three-term recurrence."""
    if m < 0:
        raise ValueError("Hermite index must be nonnegative")
    u = np.asarray(u, dtype=float)
    h_prev = np.ones_like(u)
    if m == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * u
    for n in range(1, m):
        h, h_prev = 2.0 * u * h - 2.0 * n * h_prev, h
    return h if h.ndim else float(h)


def landau_psi(m: int, x, k: float, B: float):
    """Normalized oscillator eigenfunction of p_x^2 + (k - Bx)^2.

    psi_m(x;k) = (2^m m!)^{-1/2} (B/pi)^{1/4}
                 H_m(sqrt(B)(x - k/B)) exp(-B (x - k/B)^2 / 2)
    """
    if B <= 0:
        raise ValueError("B must be positive")
    x = np.asarray(x, dtype=float)
    u = math.sqrt(B) * (x - k / B)
    pref = (B / math.pi) ** 0.25 / math.sqrt(2.0**m * math.factorial(m))
    val = pref * hermite(m, u) * np.exp(-0.5 * u * u)
    return val if np.ndim(val) else float(val)


@dataclass(frozen=True)
class ParabolicModel:
    """Parabolic channel in field B: exactly solvable fiber problem."""

    field_b: float
    stiffness_g: float

    @property
    def modified_field_bg(self) -> float:
        return math.sqrt(self.field_b**2 + self.stiffness_g**2)


def parabolic_omega(model: ParabolicModel, j: int, k: float) -> float:
    """Band j of the parabolic channel: (2j+1) B_g + (g/B_g)^2 k^2."""
    if j < 0:
        raise ValueError("band index must be nonnegative")
    bg = model.modified_field_bg
    return (2 * j + 1) * bg + (model.stiffness_g / bg) ** 2 * k * k


def parabolic_phi(model: ParabolicModel, j: int, x, k: float):
    """Normalized fiber eigenfunction of the parabolic channel.

    The Gaussian width is set by B_g, so unit L2 norm forces the
    prefactor (B_g/pi)^{1/4}; the center sits at (B/B_g^2) k.
    """
    if j < 0:
        raise ValueError("band index must be nonnegative")
    bg = model.modified_field_bg
    x = np.asarray(x, dtype=float)
    center = model.field_b / bg**2 * k
    u = math.sqrt(bg) * (x - center)
    pref = (bg / math.pi) ** 0.25 / math.sqrt(2.0**j * math.factorial(j))
    val = pref * hermite(j, u) * np.exp(-0.5 * u * u)
    return val if np.ndim(val) else float(val)


def parabolic_kinv(model: ParabolicModel, j: int, n: int, endpoint: float) -> float:
    """Positive wave number where band j meets the window edge.

    k_j^{(n)}(e) = (B_g^{3/2}/g) sqrt(2(n-j) + e - 1) for e in (1, 3);
    the negative-side inverse image of the window between levels n and
    n+1 is then [-k_j(c), -k_j(a)].
    """
    if not (1.0 < endpoint < 3.0):
        raise ValueError("window endpoint must lie in (1, 3)")
    if not (0 <= j <= n):
        raise ValueError("need 0 <= j <= n")
    bg = model.modified_field_bg
    return bg**1.5 / model.stiffness_g * math.sqrt(2 * (n - j) + endpoint - 1.0)


@dataclass(frozen=True)
class HermiteConstants:
    """Weighted Hermite sup constants used by the analytic trace bounds."""

    sup_weighted: tuple          # sup_u H_m(u) e^{-u^2/2}
    aggregate_hn: float          # (sum_{m<=n} sup_m^2 / (2^m m!))^{1/2}
    sup_quarter_weighted: tuple  # sup_u H_m(u) e^{-u^2/4}


def _weighted_sup(m: int, decay: float) -> float:
    """sup over u of H_m(u) exp(-decay * u^2) by scan plus golden-section refine."""
    span = 2.0 * math.sqrt(2 * m + 1) + 4.0
    u = np.arange(0.0, span, 1e-3)
    f = np.abs(hermite(m, u)) * np.exp(-decay * u * u)
    i = int(np.argmax(f))
    if i == 0 or i == u.size - 1:
        return float(f[i])

    def g(t: float) -> float:
        return abs(float(hermite(m, t))) * math.exp(-decay * t * t)

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = u[i - 1], u[i + 1]
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(80):
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - inv_phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + inv_phi * (b - a)
            gd = g(d)
        if b - a < 1e-13:
            break
    return max(float(f[i]), gc, gd)


def hermite_constants(n_max: int) -> HermiteConstants:
    """Sup constants for m = 0..n_max (even/odd symmetry lets us scan u >= 0)."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    sup_half = tuple(_weighted_sup(m, 0.5) for m in range(n_max + 1))
    sup_quarter = tuple(_weighted_sup(m, 0.25) for m in range(n_max + 1))
    agg = math.sqrt(sum(s * s / (2.0**m * math.factorial(m))
                        for m, s in enumerate(sup_half)))
    return HermiteConstants(sup_half, agg, sup_quarter)
