"""Wave packets between Landau levels and the edge currents they carry.

A packet is a set of per-band coefficient profiles beta_j(k) supported
in the window inverse images, with the negative-k side carrying at
least (1+gamma^2) times the mirrored weight.  The carried current is

    <psi, V_y psi> = 1/2 sum_j int_minus (|beta_j(k)|^2 - |beta_j(-k)|^2)
                                 omega_j'(k) dk,

evaluated with Feynman-Hellmann slopes; a second, full-support assembly
of the same observable serves as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionCurve, EnergyWindow, inverse_image
from .fiber import GridPolicy, expectation, solve_fiber
from .oracle import ParabolicModel

PROFILE_SHAPES = ("flat", "cosine-bump")


@dataclass
class PacketBand:
    """One band's profile, sampled on its minus interval and its mirror.

    Index i of every array refers to wave number k_minus[i] on the minus
    side and to the mirrored node -k_minus[i] on the plus side.
    """

    band_index_j: int
    minus_interval: tuple[float, float]
    k_minus: np.ndarray
    beta_minus: np.ndarray
    beta_plus: np.ndarray
    d_omega_minus: np.ndarray
    d_omega_plus: np.ndarray
    vexp_minus: np.ndarray   # <phi, (k - Bx) phi> at k_minus
    vexp_plus: np.ndarray    # same at the mirrored nodes


@dataclass
class WavePacket:
    window: EnergyWindow
    asymmetry_gamma: float
    potential: object
    field_b: float
    bands: list[PacketBand]
    norm_sq: float

    def support_k_max(self) -> float:
        return max(abs(b.minus_interval[0]) for b in self.bands)


def _profile(shape: str, k: np.ndarray, interval: tuple[float, float]) -> np.ndarray:
    lo, hi = interval
    if shape == "flat":
        return np.ones_like(k)
    if shape == "cosine-bump":
        # raised cosine = cos^2(pi t / 2): vanishes to second order at
        # the endpoints and hits exact zero there in floating point
        t = (2.0 * k - (lo + hi)) / (hi - lo)
        return 0.5 * (1.0 + np.cos(math.pi * np.clip(t, -1.0, 1.0)))
    raise ValueError(f"unknown profile shape {shape!r}")


def build_packet(curves: list[DispersionCurve], window: EnergyWindow,
                 profile_shape: str = "cosine-bump", gamma: float = math.inf,
                 samples_per_interval: int = 41,
                 policy: GridPolicy | None = None,
                 rng: np.random.Generator | None = None) -> WavePacket:
    """Construct a normalized packet over the window's inverse images.

    Each band gets the chosen bump on its minus interval; the mirrored
    plus-side copy is scaled by 1/sqrt(1+gamma^2), so the asymmetry
    condition holds with equality (gamma = inf leaves the plus side
    empty).  Slopes and velocity expectations come from fresh fiber
    solves at the sample nodes, independently on each side.  An optional
    rng applies smooth multiplicative jitter to the profile before
    normalization (support and asymmetry ratio are preserved).
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if samples_per_interval < 3:
        raise ValueError("need at least 3 samples per interval")
    if len(curves) < window.level_n + 1:
        raise ValueError(
            f"packet between levels {window.level_n} and {window.level_n + 1} "
            f"needs bands 0..{window.level_n}")
    bands = []
    pot = curves[0].potential
    B = curves[0].field_b
    plus_scale = 0.0 if math.isinf(gamma) else 1.0 / math.sqrt(1.0 + gamma * gamma)

    for curve in curves[:window.level_n + 1]:
        image = inverse_image(curve, window)
        if image.empty:
            continue
        lo, hi = image.minus_interval
        k_minus = np.linspace(lo, hi, samples_per_interval)
        beta = _profile(profile_shape, k_minus, (lo, hi))
        if rng is not None:
            beta = beta * (0.75 + 0.5 * rng.random(k_minus.size))
        j = curve.band_index_j
        vexp_m = np.empty(k_minus.size)
        vexp_p = np.empty(k_minus.size)
        for i, k in enumerate(k_minus):
            grid, pairs = solve_fiber(pot, B, float(k), j + 1, policy=policy)
            x = grid.points()
            vexp_m[i] = expectation(grid, pairs[j].phi, k - B * x)
            grid_p, pairs_p = solve_fiber(pot, B, float(-k), j + 1, policy=policy)
            x_p = grid_p.points()
            vexp_p[i] = expectation(grid_p, pairs_p[j].phi, -k - B * x_p)
        bands.append(PacketBand(
            band_index_j=j, minus_interval=(lo, hi), k_minus=k_minus,
            beta_minus=beta, beta_plus=plus_scale * beta,
            d_omega_minus=2.0 * vexp_m, d_omega_plus=2.0 * vexp_p,
            vexp_minus=vexp_m, vexp_plus=vexp_p))

    if not bands:
        raise ValueError("all inverse images are empty for this window")

    raw = sum(float(np.trapezoid(b.beta_minus**2, b.k_minus))
              + float(np.trapezoid(b.beta_plus**2, b.k_minus))
              for b in bands)
    scale = 1.0 / math.sqrt(raw)
    for b in bands:
        b.beta_minus = b.beta_minus * scale
        b.beta_plus = b.beta_plus * scale
    return WavePacket(window, gamma, pot, B, bands, 1.0)


def packet_norm_sq(packet: WavePacket) -> float:
    """Recompute sum_j int |beta_j|^2 dk over both half-lines."""
    return sum(float(np.trapezoid(b.beta_minus**2, b.k_minus))
               + float(np.trapezoid(b.beta_plus**2, b.k_minus))
               for b in packet.bands)


def edge_current(packet: WavePacket) -> float:
    """Signed edge current via the minus-interval difference form."""
    total = 0.0
    for b in packet.bands:
        integrand = (b.beta_minus**2 - b.beta_plus**2) * b.d_omega_minus
        total += 0.5 * float(np.trapezoid(integrand, b.k_minus))
    return total


def direct_current(packet: WavePacket) -> float:
    """The same observable assembled over the full support.

    sum_j int |beta_j(k)|^2 <phi_j(.;k), (k - Bx) phi_j(.;k)> dk with the
    plus-side integral running over the mirrored nodes.
    """
    total = 0.0
    for b in packet.bands:
        total += float(np.trapezoid(b.beta_minus**2 * b.vexp_minus, b.k_minus))
        total += float(np.trapezoid(b.beta_plus**2 * b.vexp_plus, b.k_minus))
    return total


def gamma_factor(gamma: float) -> float:
    """gamma^2 / (2 + gamma^2), extended to gamma = inf."""
    if math.isinf(gamma):
        return 1.0
    return gamma * gamma / (2.0 + gamma * gamma)


def parabolic_bound(model: ParabolicModel, window: EnergyWindow,
                    gamma: float) -> float:
    """Closed-form lower bound on -<psi, V_y psi> for the parabolic channel.

    (gamma^2/(2+gamma^2)) sqrt(a-1) g / sqrt(B_g), for any admissible
    window and left-weighted packet.
    """
    return (gamma_factor(gamma) * math.sqrt(window.lower_a - 1.0)
            * model.stiffness_g / math.sqrt(model.modified_field_bg))


@dataclass(frozen=True)
class PerturbationBudget:
    """Inputs of the perturbed-strip current bound."""

    outer_a: float          # enlarged window lower shape parameter
    outer_c: float          # enlarged window upper shape parameter
    v1_ratio: float         # ||V1||_inf / B
    fitted_cn: float        # empirical slope-floor constant
    gamma: float

    def __post_init__(self):
        if self.v1_ratio < 0:
            raise ValueError("perturbation ratio must be nonnegative")
        if self.fitted_cn < 0:
            raise ValueError("fitted constant must be nonnegative")


def perturbation_margin(budget: PerturbationBudget, window: EnergyWindow,
                        B: float) -> dict:
    """Perturbation allowance F_n and the guaranteed current lower bound.

    F_n = (2/(ct-at))^{1/2} ((c-a)/2 + v1)^{1/2}
          * [ 2 (2n+c+v1)^{1/2}
              + G Cn (3-ct)^2 (at-1)^2 (2/(ct-at))^{3/2} ((c-a)/2 + v1)^{3/2} ]

    with G = gamma^2/(2+gamma^2), and the bound is
    sqrt(B) (G Cn (3-ct)^2 (at-1)^2 - F_n) for a unit-norm packet.
    """
    a, c, n = window.lower_a, window.upper_c, window.level_n
    at, ct = budget.outer_a, budget.outer_c
    if not (1.0 < at < a < c < ct < 3.0):
        raise ValueError("outer window must satisfy 1 < a~ < a < c < c~ < 3")
    g = gamma_factor(budget.gamma)
    v1 = budget.v1_ratio
    lead = g * budget.fitted_cn * (3.0 - ct) ** 2 * (at - 1.0) ** 2
    width_term = (c - a) / 2.0 + v1
    first = math.sqrt(2.0 / (ct - at)) * math.sqrt(width_term)
    second = 2.0 * math.sqrt(2 * n + c + v1) \
        + lead * (2.0 / (ct - at)) ** 1.5 * width_term ** 1.5
    f_n = first * second
    return {"F_n": f_n,
            "lead_term": lead,
            "lower_bound": math.sqrt(B) * (lead - f_n)}


@dataclass(frozen=True)
class MourreProbe:
    """Finite-translation conjugate probe: step alpha and its sine floor."""

    alpha: float
    s_constant: float

    @classmethod
    def for_packet(cls, alpha: float, packet: WavePacket) -> "MourreProbe":
        """Validate alpha against the packet support and fix the sine floor.

        Requires 0 < alpha < pi / k_max on the support union; the floor is
        min(sin(alpha k_inner), sin(alpha k_outer)) over the innermost edge
        of the highest band and the outermost edge of band 0.
        """
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        k_max = packet.support_k_max()
        if alpha * k_max >= math.pi:
            raise ValueError(
                f"alpha={alpha} too large: alpha*k_max={alpha * k_max:.3f} >= pi")
        top = max(packet.bands, key=lambda b: b.band_index_j)
        band0 = min(packet.bands, key=lambda b: b.band_index_j)
        k_inner = abs(top.minus_interval[1])
        k_outer = abs(band0.minus_interval[0])
        s = min(math.sin(alpha * k_inner), math.sin(alpha * k_outer))
        return cls(alpha, s)


def mourre_form(packet: WavePacket, probe: MourreProbe) -> float:
    """Commutator quadratic form of the conjugate translation probe.

    sum_j int_minus sin(alpha k) (|beta_j(k)|^2 + |beta_j(-k)|^2)
    omega_j'(k) dk; both factors are negative on the support, so the
    form is positive whenever the probe invariant holds.
    """
    if probe.alpha * packet.support_k_max() >= math.pi:
        raise ValueError("probe violates alpha < pi / k_max on this packet")
    total = 0.0
    for b in packet.bands:
        integrand = (np.sin(probe.alpha * b.k_minus)
                     * (b.beta_minus**2 + b.beta_plus**2) * b.d_omega_minus)
        total += float(np.trapezoid(integrand, b.k_minus))
    return total


def mourre_perturbation_budget(alpha: float, v1_inf: float,
                               yv1_inf: float) -> float:
    """Commutator allowance of a y-decaying perturbation: 2||y V1|| + |alpha| ||V1||."""
    if v1_inf < 0 or yv1_inf < 0:
        raise ValueError("sup norms must be nonnegative")
    return 2.0 * yv1_inf + abs(alpha) * v1_inf


def current_report(packet: WavePacket, bound: float | None = None) -> dict:
    """JSON-friendly record of a packet current evaluation."""
    cur = edge_current(packet)
    b = packet.field_b
    rec = {
        "potential": packet.potential.describe(),
        "B": b,
        "window": packet.window.describe(),
        "gamma": packet.asymmetry_gamma,
        "current": cur,
        "current_per_sqrtB": cur / math.sqrt(b),
        "direct_current": direct_current(packet),
    }
    if bound is not None:
        rec["bound"] = bound
        rec["margin"] = -cur - bound
        rec["pass"] = bool(-cur >= bound)
    return rec
