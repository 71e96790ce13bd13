"""Dispersion curves omega_j(k), their derivatives and window inverse images.

Band identity is by ascending eigenvalue order at each k; the curves
never cross because the fiber eigenvalues are simple.  Each curve keeps
the band derivative along two routes: the Feynman-Hellmann expectation
2 <phi, (k - Bx) phi> (exact for the discretized operator) and central
differences on the k-grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fiber import (Grid, GridPolicy, expectation, solve_fiber,
                    trace_value)
from .potentials import ConfiningPotential, PARABOLIC, POWER, SHARP, FREE


class AmbiguousInversionError(RuntimeError):
    """A window edge is crossed more than once per half-line."""


@dataclass(frozen=True)
class EnergyWindow:
    """Spectral window between Landau levels n and n+1.

    The interval is [(2n+a) E_ref, (2n+c) E_ref] with 1 < a < c < 3 and
    E_ref the reference field: B for walls, B_g for the parabolic channel.
    """

    level_n: int
    lower_a: float
    upper_c: float
    reference_field: float

    def __post_init__(self):
        if self.level_n < 0:
            raise ValueError("window level must be nonnegative")
        if not (1.0 < self.lower_a < self.upper_c < 3.0):
            raise ValueError("window shape must satisfy 1 < a < c < 3")
        if self.reference_field <= 0:
            raise ValueError("reference field must be positive")

    @classmethod
    def for_potential(cls, pot: ConfiningPotential, B: float, n: int,
                      a: float, c: float) -> "EnergyWindow":
        ref = math.hypot(B, pot.stiffness_g) if pot.kind == PARABOLIC else B
        return cls(n, a, c, ref)

    @property
    def lo(self) -> float:
        return (2 * self.level_n + self.lower_a) * self.reference_field

    @property
    def hi(self) -> float:
        return (2 * self.level_n + self.upper_c) * self.reference_field

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def describe(self) -> dict:
        return {"n": self.level_n, "a": self.lower_a, "c": self.upper_c,
                "reference_field": self.reference_field,
                "interval": [self.lo, self.hi]}


@dataclass
class DispersionCurve:
    """Band j sampled over a symmetric k-grid."""

    band_index_j: int
    potential: ConfiningPotential
    field_b: float
    k_samples: np.ndarray
    omega: np.ndarray
    d_omega_fh: np.ndarray
    d_omega_fd: np.ndarray = field(default=None)
    phi_cache: list | None = None    # per-sample eigenfunctions
    grids: list | None = None        # per-sample grids (shared across bands)


def default_k_grid(pot: ConfiningPotential, B: float, n_levels: int,
                   samples: int = 401, margin: float = 1.1) -> np.ndarray:
    """Symmetric k-grid wide enough to contain every admissible inverse image.

    Walls span +-(BL/2 + 6 sqrt((2n+3)B)); the parabolic channel spans the
    closed-form inverse image of the widest admissible window plus margin.
    """
    if pot.kind == PARABOLIC:
        bg = math.hypot(B, pot.stiffness_g)
        k_edge = bg**1.5 / pot.stiffness_g * math.sqrt(2 * n_levels + 2.0)
        span = margin * k_edge
    else:
        half_l = pot.half_width_l / 2.0 if pot.is_wall else 0.0
        span = B * half_l + 6.0 * math.sqrt((2 * n_levels + 3) * B)
    if samples % 2 == 0:
        samples += 1
    return np.linspace(-span, span, samples)


def _check_symmetric(k_grid: np.ndarray):
    if np.any(np.diff(k_grid) <= 0):
        raise ValueError("k grid must be strictly increasing")
    if not np.allclose(k_grid + k_grid[::-1], 0.0, atol=1e-9 * max(1.0, abs(k_grid[-1]))):
        raise ValueError("k grid must be symmetric about 0")


def _solve_sample(args):
    """Worker for one k-sample (top level so process pools can pickle it)."""
    pot, B, k, count, policy, keep_phi = args
    grid, pairs = solve_fiber(pot, B, k, count, policy=policy)
    x = grid.points()
    omegas = [p.omega for p in pairs]
    d_fh = [fh_derivative(grid, p.phi, k, B, x=x) for p in pairs]
    phis = [p.phi for p in pairs] if keep_phi else None
    return omegas, d_fh, grid, phis


def trace_curves(pot: ConfiningPotential, B: float, j_max: int,
                 k_grid: np.ndarray, keep_phi: bool = False,
                 policy: GridPolicy | None = None,
                 threads: int = 1) -> list[DispersionCurve]:
    """Solve the fiber problem over k_grid for bands 0..j_max.

    Distinct k-samples are independent; with threads > 1 they are solved
    by a process pool and collected in grid order, so results do not
    depend on the worker count.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    _check_symmetric(k_grid)
    count = j_max + 1
    omegas = np.empty((k_grid.size, count))
    d_fh = np.empty_like(omegas)
    phis = [[] for _ in range(count)] if keep_phi else None
    grids: list[Grid] = [] if keep_phi else None

    work = [(pot, B, float(k), count, policy, keep_phi) for k in k_grid]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_solve_sample, work, chunksize=8))
    else:
        results = [_solve_sample(w) for w in work]

    for i, (om_i, d_i, grid, phi_i) in enumerate(results):
        omegas[i, :] = om_i
        d_fh[i, :] = d_i
        if keep_phi:
            for j in range(count):
                phis[j].append(phi_i[j])
            grids.append(grid)

    curves = []
    for j in range(count):
        fd = np.gradient(omegas[:, j], k_grid, edge_order=1)
        curves.append(DispersionCurve(
            band_index_j=j, potential=pot, field_b=B,
            k_samples=k_grid.copy(), omega=omegas[:, j].copy(),
            d_omega_fh=d_fh[:, j].copy(), d_omega_fd=fd,
            phi_cache=phis[j] if keep_phi else None,
            grids=grids if keep_phi else None))
    return curves


def fh_derivative(grid: Grid, phi: np.ndarray, k: float, B: float,
                  x: np.ndarray | None = None) -> float:
    """Feynman-Hellmann band slope: 2 <phi, (k - Bx) phi>."""
    if x is None:
        x = grid.points()
    return 2.0 * expectation(grid, phi, k - B * x)


def sharp_trace_derivative(grid: Grid, phi: np.ndarray,
                           pot: ConfiningPotential, B: float) -> float:
    """Band slope of a sharp wall from the eigenfunction wall traces.

    omega' = (V0/B) (phi(L/2)^2 - phi(-L/2)^2); the distributional wall
    derivative plus the virial identity trades the velocity expectation
    for the two boundary traces.
    """
    if pot.kind != SHARP:
        raise ValueError("trace route requires the sharp wall")
    half = pot.half_width_l / 2.0
    t_right = trace_value(grid, phi, half)
    t_left = trace_value(grid, phi, -half)
    return pot.strength_v0 / B * (t_right**2 - t_left**2)


def _wall_moment(grid: Grid, phi: np.ndarray, half: float, power: float,
                 side: int, x: np.ndarray | None = None) -> float:
    """Integral of (|x| - L/2)^power phi^2 beyond one wall (side = +-1)."""
    if x is None:
        x = grid.points()
    dist = side * x - half
    w = np.where(dist > 0, np.maximum(dist, 0.0) ** power, 0.0)
    return expectation(grid, phi, w)


def power_derivative(grid: Grid, phi: np.ndarray, pot: ConfiningPotential,
                     B: float) -> float:
    """Band slope of a power wall from the two wall integrals.

    omega'(k) = -(p V0 / B) (I_left(k) - I_right(k)) with
    I_side = integral of (|x| - L/2)^{p-1} phi^2 beyond that wall; the
    right integral equals I_left(-k) by the x -> -x, k -> -k symmetry.
    """
    if pot.kind != POWER:
        raise ValueError("wall-integral route requires the power wall")
    half = pot.half_width_l / 2.0
    x = grid.points()
    i_left = _wall_moment(grid, phi, half, pot.exponent_p - 1.0, -1, x=x)
    i_right = _wall_moment(grid, phi, half, pot.exponent_p - 1.0, +1, x=x)
    return -pot.exponent_p * pot.strength_v0 / B * (i_left - i_right)


@dataclass(frozen=True)
class InverseImage:
    """Wave numbers of one band whose energy lies inside the window."""

    band_index_j: int
    minus_interval: tuple[float, float] | None
    plus_interval: tuple[float, float] | None

    @property
    def empty(self) -> bool:
        return self.minus_interval is None


def _edge_crossings(k: np.ndarray, om: np.ndarray, level: float,
                    tol: float) -> list[float]:
    """All crossings of om = level on the sampled half-line, by bisection
    on the piecewise-linear interpolant."""
    sgn = np.sign(om - level)
    hits = []
    for i in range(k.size - 1):
        if sgn[i] == 0.0:
            hits.append(float(k[i]))
        elif sgn[i] * sgn[i + 1] < 0:
            lo_k, hi_k = float(k[i]), float(k[i + 1])
            lo_v = float(om[i] - level)
            mid = 0.5 * (lo_k + hi_k)
            for _ in range(200):
                mid = 0.5 * (lo_k + hi_k)
                mid_v = float(np.interp(mid, [k[i], k[i + 1]], [om[i], om[i + 1]])) - level
                if abs(mid_v) <= tol:
                    break
                if mid_v * lo_v < 0:
                    hi_k = mid
                else:
                    lo_k, lo_v = mid, mid_v
            hits.append(mid)
    if sgn[-1] == 0.0:
        hits.append(float(k[-1]))
    return hits


def inverse_image(curve: DispersionCurve, window: EnergyWindow) -> InverseImage:
    """Locate omega_j^{-1}(window) on each half-line.

    Requires the sampled curve to cross each window edge at most once per
    half-line; more crossings mean the k-grid is too coarse (or the
    window invalid) and raise AmbiguousInversionError.
    """
    k = curve.k_samples
    om = curve.omega
    tol = 1e-8 * window.reference_field
    neg = k <= 0.0
    k_neg, om_neg = k[neg], om[neg]

    if om_neg[0] > window.lo and om_neg[0] < window.hi:
        raise AmbiguousInversionError(
            "curve still inside the window at the leftmost sample; widen the k grid")

    lo_hits = _edge_crossings(k_neg, om_neg, window.lo, tol)
    hi_hits = _edge_crossings(k_neg, om_neg, window.hi, tol)
    if len(lo_hits) > 1 or len(hi_hits) > 1:
        raise AmbiguousInversionError(
            f"band {curve.band_index_j}: window edge crossed "
            f"{max(len(lo_hits), len(hi_hits))} times on k<=0")

    inside = (om_neg >= window.lo) & (om_neg <= window.hi)
    if not lo_hits and not hi_hits and not inside.any():
        return InverseImage(curve.band_index_j, None, None)

    k_hi_edge = hi_hits[0] if hi_hits else float(k_neg[0])
    k_lo_edge = lo_hits[0] if lo_hits else float(k_neg[-1])
    left, right = min(k_hi_edge, k_lo_edge), max(k_hi_edge, k_lo_edge)
    return InverseImage(curve.band_index_j, (left, right), (-right, -left))


@dataclass(frozen=True)
class GapTestResult:
    passed: bool
    gap_d_n: float
    window_width: float
    images_disjoint: bool


def gap_test(curves: list[DispersionCurve], window: EnergyWindow) -> GapTestResult:
    """Check |window| < d_n, certifying pairwise-disjoint inverse images.

    d_n is the sampled minimum of omega_{j+1} - omega_j over consecutive
    bands up to n.  Disjointness of the computed images is also verified
    directly.
    """
    n = window.level_n
    if len(curves) < n + 1:
        raise ValueError(f"gap test at level {n} needs bands 0..{n}")
    gaps = [float(np.min(curves[j + 1].omega - curves[j].omega))
            for j in range(min(n, len(curves) - 1))]
    d_n = min(gaps) if gaps else math.inf
    images = [inverse_image(c, window) for c in curves[:n + 1]]
    intervals = []
    for im in images:
        if not im.empty:
            intervals.append(im.minus_interval)
            intervals.append(im.plus_interval)
    intervals.sort()
    disjoint = all(intervals[i][1] <= intervals[i + 1][0] + 1e-12
                   for i in range(len(intervals) - 1))
    return GapTestResult(window.width < d_n and disjoint, d_n, window.width, disjoint)


@dataclass(frozen=True)
class WaveNumberResult:
    passed: bool
    threshold: float
    worst_endpoint: float | None


def wave_number_check(curves: list[DispersionCurve], window: EnergyWindow,
                      alpha: float) -> WaveNumberResult:
    """Assert each minus-side inverse image lies left of -B L / alpha."""
    if alpha <= 2:
        raise ValueError("alpha must exceed 2")
    pot = curves[0].potential
    worst = None
    for c in curves[:window.level_n + 1]:
        im = inverse_image(c, window)
        if im.empty:
            continue
        right = im.minus_interval[1]
        if worst is None or right > worst:
            worst = right
    if not pot.is_wall:
        if worst is None:
            return WaveNumberResult(True, -math.inf, None)  # vacuous
        raise ValueError("wave-number localization applies to wall potentials")
    threshold = -curves[0].field_b * pot.half_width_l / alpha
    if worst is None:
        return WaveNumberResult(True, threshold, None)
    return WaveNumberResult(worst < threshold, threshold, worst)


@dataclass(frozen=True)
class AsymptoteReport:
    band_index_j: int
    kind: str
    omega_at_kmax: float
    expected_limit: float | None
    gap_at_kmax: float | None
    gap_monotone: bool | None
    unbounded_growth: bool | None


def asymptote_check(curve: DispersionCurve, pot: ConfiningPotential) -> AsymptoteReport:
    """Check the large-|k| behaviour of the band against the wall limit.

    Sharp walls approach (2j+1)B + V0 from below and the residual gap
    must shrink monotonically over the last decade of samples; unbounded
    walls must keep growing; the free band is constant.
    """
    j = curve.band_index_j
    om_end = float(curve.omega[-1])
    if pot.kind == SHARP:
        limit = (2 * j + 1) * curve.field_b + pot.strength_v0
        tail = curve.omega[-max(curve.k_samples.size // 10, 3):]
        gaps = limit - tail
        return AsymptoteReport(j, pot.kind, om_end, limit, float(gaps[-1]),
                               bool(np.all(np.diff(gaps) <= 1e-9 * curve.field_b)), None)
    if pot.kind == FREE:
        limit = (2 * j + 1) * curve.field_b
        return AsymptoteReport(j, pot.kind, om_end, limit,
                               float(abs(om_end - limit)), None, None)
    growing = om_end > float(curve.omega[curve.k_samples.size // 2]) + curve.field_b
    return AsymptoteReport(j, pot.kind, om_end, None, None, None, bool(growing))
