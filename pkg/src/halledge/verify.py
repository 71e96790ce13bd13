"""Numerical checks of the analytic estimates and empirical constant fits.

Every check returns a Verdict with a machine-readable status:
"pass"/"fail" when the hypothesis held and the inequality was tested,
"precondition" when the run sits outside the estimate's regime (small
field, positive effective potential violated, ...), which is reported
instead of a failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dispersion import DispersionCurve, EnergyWindow, inverse_image
from .fiber import Grid, GridPolicy, solve_fiber, trace_value
from .oracle import landau_psi
from .potentials import ConfiningPotential, POWER

PASS, FAIL, PRECONDITION = "pass", "fail", "precondition"

# Eigenfunction tail values below this floor are inverse-iteration noise.
TAIL_FLOOR = 1e-130


@dataclass
class Verdict:
    check: str
    params: dict
    margin: float
    status: str
    detail: str = ""

    def as_record(self) -> dict:
        return {"check": self.check, "params": self.params,
                "margin": self.margin, "status": self.status,
                "detail": self.detail}


@dataclass
class EmpiricalConstant:
    name: str
    value: float
    fit_range: list
    residual: float
    detail: dict = dc_field(default_factory=dict)


@dataclass
class IntervalSamples:
    """Fiber solves along one band's minus interval (shared by the checks)."""

    band_index_j: int
    B: float
    potential: ConfiningPotential
    k: np.ndarray
    omega: np.ndarray
    d_omega_fh: np.ndarray
    grids: list
    phis: list


def sample_minus_interval(pot: ConfiningPotential, B: float,
                          curves: list[DispersionCurve], window: EnergyWindow,
                          j: int, m_samples: int = 17,
                          policy: GridPolicy | None = None) -> IntervalSamples | None:
    """Solve the band along its minus interval; None when the image is empty."""
    image = inverse_image(curves[j], window)
    if image.empty:
        return None
    lo, hi = image.minus_interval
    ks = np.linspace(lo, hi, m_samples)
    omegas = np.empty(m_samples)
    d_fh = np.empty(m_samples)
    grids, phis = [], []
    for i, k in enumerate(ks):
        grid, pairs = solve_fiber(pot, B, float(k), j + 1, policy=policy)
        x = grid.points()
        omegas[i] = pairs[j].omega
        d_fh[i] = 2.0 * float(np.trapezoid((k - B * x) * pairs[j].phi**2,
                                           dx=grid.spacing_h))
        grids.append(grid)
        phis.append(pairs[j].phi)
    return IntervalSamples(j, B, pot, ks, omegas, d_fh, grids, phis)


def effective_forbidden_potential(pot: ConfiningPotential, B: float, k: float,
                                  omega: float, x: np.ndarray) -> np.ndarray:
    """W_j(x;k) = (k - Bx)^2 + V0(x) - omega_j(k)."""
    return (B * x - k) ** 2 + pot.evaluate(x) - omega


def forbidden_decay_check(grid: Grid, phi: np.ndarray, W: np.ndarray,
                          s_min: float, t_max: float | None = None,
                          floor_ratio: float = 1e-30,
                          params: dict | None = None) -> Verdict:
    """Check phi(t) <= phi(s) exp(-int_s^t sqrt(W)) for all s <= t in range.

    Precondition: W > 0 on the tested range.  The pairwise inequality is
    equivalent to monotone decrease of log phi(x) + int sqrt(W), so the
    reported margin is the worst pairwise log-slack over s < t.  Tail
    values below floor_ratio times the eigenfunction peak are excluded:
    an inverse-iteration eigenvector cannot follow the true decay over
    more than roughly thirty decades, and below that floor the samples
    are solver noise, not the eigenfunction.
    """
    params = dict(params or {})
    x = grid.points()
    t_max = x[-1] if t_max is None else t_max
    sel = (x >= s_min) & (x <= t_max)
    if not np.any(sel):
        return Verdict("forbidden-decay", params, math.nan, PRECONDITION,
                       "empty test range")
    if np.min(W[sel]) <= 0:
        return Verdict("forbidden-decay", params, float(np.min(W[sel])),
                       PRECONDITION, "effective potential not positive on range")
    xs = x[sel]
    ph = phi[sel]
    floor = max(TAIL_FLOOR, floor_ratio * float(np.max(np.abs(phi))))
    if float(ph.min()) < -floor:
        return Verdict("forbidden-decay", params, float(ph.min()), FAIL,
                       "eigenfunction changes sign in the forbidden range")
    usable = ph > floor
    if not usable.all():
        cut = int(np.argmin(usable))    # first node at/below the floor
        usable = np.zeros_like(usable)
        usable[:cut] = True
    xs, ph = xs[usable], ph[usable]
    if xs.size < 2:
        return Verdict("forbidden-decay", params, math.nan, PRECONDITION,
                       "tail below noise floor on the whole range")
    sqw = np.sqrt(W[sel][usable])
    integral = np.concatenate(([0.0], np.cumsum(
        0.5 * (sqw[1:] + sqw[:-1]) * np.diff(xs))))
    cvals = np.log(ph) + integral
    # min over s < t of c(s) - c(t) via running minima
    run_min = np.minimum.accumulate(cvals[:-1])
    worst = float(np.min(run_min - cvals[1:]))
    status = PASS if worst >= 0.0 else FAIL
    return Verdict("forbidden-decay", params, worst, status,
                   f"tested x in [{xs[0]:.4f}, {xs[-1]:.4f}], "
                   f"{xs.size} nodes above floor")


def trace_bound_check(grid: Grid, phi: np.ndarray, B: float, L: float,
                      omega: float, pot: ConfiningPotential, k: float,
                      params: dict | None = None) -> Verdict:
    """Midline trace bound phi(0)^2 <= (BL/2) exp(-B L^2 / 24).

    Precondition: the forbidden-zone floor W >= (BL/8)^2 on [-L/6, 0]
    must hold, which requires the wave number to sit deep on the minus
    side (large B).
    """
    params = dict(params or {})
    x = grid.points()
    sel = (x >= -L / 6.0) & (x <= 0.0)
    W = effective_forbidden_potential(pot, B, k, omega, x[sel])
    floor = (B * L / 8.0) ** 2
    if not np.all(W >= floor):
        return Verdict("midline-trace-bound", params,
                       float(np.min(W) - floor), PRECONDITION,
                       "forbidden-zone floor (BL/8)^2 violated on [-L/6, 0]")
    bound = (B * L / 2.0) * math.exp(-B * L * L / 24.0)
    val = trace_value(grid, phi, 0.0) ** 2
    margin = bound - val
    return Verdict("midline-trace-bound", params, margin,
                   PASS if margin >= 0 else FAIL,
                   f"trace^2={val:.3e} bound={bound:.3e}")


def sed_constant_extract(samples_by_b: dict, L: float) -> EmpiricalConstant:
    """Right-wall trace constant: max_k V0 phi_j(L/2;k)^2 / B per field.

    The extracted constant is the max over the swept fields; the per-field
    trend must not grow with B.
    """
    per_b = {}
    for B, samples in sorted(samples_by_b.items()):
        vals = []
        for smp in samples:
            v0 = smp.potential.strength_v0
            for grid, phi in zip(smp.grids, smp.phis):
                vals.append(v0 * trace_value(grid, phi, L / 2.0) ** 2 / B)
        per_b[B] = max(vals)
    b_list = sorted(per_b)
    seq = [per_b[b] for b in b_list]
    growing = any(seq[i + 1] > 1.5 * seq[i] for i in range(len(seq) - 1))
    return EmpiricalConstant(
        name="gamma_nj_hat", value=max(seq), fit_range=b_list,
        residual=float(np.std(seq)),
        detail={"per_B": per_b, "non_increasing_trend": not growing})


def boundary_trace_scaling(samples_by_b: dict, L: float, side: int) -> EmpiricalConstant:
    """log-log slope of max_k V0 phi_j(side*L/2;k)^2 / B against B."""
    b_list = sorted(samples_by_b)
    ys = []
    for B in b_list:
        vals = []
        for smp in samples_by_b[B]:
            v0 = smp.potential.strength_v0
            for grid, phi in zip(smp.grids, smp.phis):
                vals.append(v0 * trace_value(grid, phi, side * L / 2.0) ** 2 / B)
        ys.append(max(vals))
    slope, intercept = np.polyfit(np.log(b_list), np.log(ys), 1)
    resid = float(np.max(np.abs(np.log(ys) - (slope * np.log(b_list) + intercept))))
    return EmpiricalConstant(
        name="left_trace_slope" if side < 0 else "right_trace_slope",
        value=float(slope), fit_range=b_list, residual=resid,
        detail={"values": dict(zip(b_list, ys))})


def cn_extract(samples_by_b: dict, window: EnergyWindow) -> EmpiricalConstant:
    """Slope-floor constant: min over B, k of (-omega') / ((a-1)^2 (3-c)^2 sqrt(B)).

    Fails loudly (ValueError) if the slope is not negative somewhere on a
    minus interval, which would contradict the derivative bound outright.
    """
    a, c = window.lower_a, window.upper_c
    shape = (a - 1.0) ** 2 * (3.0 - c) ** 2
    per_b = {}
    for B, samples in sorted(samples_by_b.items()):
        vals = []
        for smp in samples:
            if np.any(smp.d_omega_fh >= 0):
                raise ValueError(
                    f"band slope nonnegative on a minus interval at B={B}")
            vals.append(float(np.min(-smp.d_omega_fh / (shape * math.sqrt(B)))))
        per_b[B] = min(vals)
    b_list = sorted(per_b)
    seq = np.array([per_b[b] for b in b_list])
    cv = float(np.std(seq) / np.mean(seq))
    return EmpiricalConstant(
        name="C_n_hat", value=float(np.min(seq)), fit_range=b_list,
        residual=cv, detail={"per_B": per_b, "coefficient_of_variation": cv})


def _tail_moment(m: int, power: float, B: float, k: float, L: float,
                 rtol: float = 1e-10) -> float:
    """integral over (-inf, -L/2) of (-x - L/2)^power psi_m(x;k)^2 dx.

    Trapezoid with interval doubling until the value settles; the
    integrand is a polynomial times a Gaussian centered at k/B.
    """
    center = k / B
    width = 1.0 / math.sqrt(B)
    lo = min(center, -L / 2.0) - 14.0 * width
    hi = -L / 2.0
    n = 2001
    prev = None
    for _ in range(8):
        x = np.linspace(lo, hi, n)
        f = (-x - L / 2.0) ** power * landau_psi(m, x, k, B) ** 2
        val = float(np.trapezoid(f, x))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        prev = val
        n = 2 * n - 1
    return prev


def ipm_scaling_check(m: int, p: float, b_list: list, L: float,
                      k_by_b: dict,
                      params: dict | None = None) -> tuple[EmpiricalConstant, Verdict]:
    """Tail-moment scaling of the oscillator states beyond the left wall.

    For k at the left endpoint of the band-0 minus interval of the power
    wall, integral (-x-L/2)^{p+1} psi_m^2 must scale like B^{-(p+1)/2};
    the fitted log-log slope has to be at most -(p+1)/2 + 0.1.
    """
    params = dict(params or {})
    vals = []
    for B in b_list:
        vals.append(_tail_moment(m, p + 1.0, B, k_by_b[B], L))
    slope, intercept = np.polyfit(np.log(b_list), np.log(vals), 1)
    resid = float(np.max(np.abs(np.log(vals) - (slope * np.log(b_list) + intercept))))
    limit = -(p + 1.0) / 2.0 + 0.1
    const = EmpiricalConstant("tail_moment_slope", float(slope), list(b_list),
                              resid, detail={"values": dict(zip(b_list, vals))})
    verdict = Verdict("tail-moment-scaling", {**params, "m": m, "p": p},
                      limit - float(slope),
                      PASS if slope <= limit else FAIL,
                      f"slope={slope:.4f} limit={limit:.4f}")
    return const, verdict


def wall_cross_term_check(smp: IntervalSamples, m: int, window: EnergyWindow,
                          L: float, params: dict | None = None) -> Verdict:
    """Wall cross-term bound for the power wall.

    integral over x > 0 of V0(x) phi_j(x;k) psi_m(x;k) dx must stay below
    (L/2) sqrt((2n+c) B), with both factors taken positive on the right
    tail.
    """
    params = dict(params or {})
    pot, B = smp.potential, smp.B
    if pot.kind != POWER:
        return Verdict("wall-cross-term", params, math.nan, PRECONDITION,
                       "check requires the power wall")
    bound = (L / 2.0) * math.sqrt((2 * window.level_n + window.upper_c) * B)
    worst = math.inf
    for k, grid, phi in zip(smp.k, smp.grids, smp.phis):
        x = grid.points()
        pos = x >= 0.0
        # sign-align both factors positive on the right tail
        phi_pos = phi[pos]
        anchor = phi_pos[np.argmax(np.abs(phi_pos))]
        phi_pos = phi_pos if anchor >= 0 else -phi_pos
        psi = landau_psi(m, x[pos], float(k), B)
        anchor = psi[np.argmax(np.abs(psi))]
        psi = psi if anchor >= 0 else -psi
        val = float(np.trapezoid(pot.evaluate(x[pos]) * np.abs(phi_pos) * np.abs(psi),
                                 x[pos]))
        worst = min(worst, bound - val)
    return Verdict("wall-cross-term", {**params, "m": m}, worst,
                   PASS if worst >= 0 else FAIL,
                   f"bound={bound:.4f}")
