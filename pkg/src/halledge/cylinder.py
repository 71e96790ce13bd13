"""Finite-cylinder geometry: discrete modes, eigenstate currents, perturbations.

Compactifying y to circumference D quantizes the wave numbers to
k_p = 2 pi p / D, so the spectrum is the discrete set {omega_m(k_p)} and
every in-window state is a finite combination of mode eigenstates.  The
current carried by a packet is then an exact finite sum of eigenstate
currents.  A bounded perturbation supported inside the strip couples
finitely many modes; the perturbed problem is solved as a block matrix
on one shared transverse grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

from .dispersion import EnergyWindow
from .fiber import Grid, GridPolicy, expectation, solve_fiber
from .potentials import ConfiningPotential, SHARP


class CylinderError(RuntimeError):
    pass


@dataclass(frozen=True)
class CylinderGeometry:
    circumference_d: float
    wall: ConfiningPotential
    field_b: float

    def __post_init__(self):
        if self.circumference_d <= 0:
            raise ValueError("circumference must be positive")
        if self.field_b <= 0:
            raise ValueError("field strength must be positive")


def mode_wavenumber(p: int, D: float) -> float:
    """Quantized wave number k_p = 2 pi p / D."""
    if D <= 0:
        raise ValueError("circumference must be positive")
    return 2.0 * math.pi * p / D


@dataclass
class SpectrumEntry:
    m: int
    p: int
    k_p: float
    omega: float
    current: float            # <phi, (k_p - Bx) phi>, i.e. omega'/2
    phi: np.ndarray = field(repr=False)
    grid: Grid = field(repr=False)
    in_window: bool = False


@dataclass
class CylinderSpectrum:
    geometry: CylinderGeometry
    window: EnergyWindow
    entries: dict            # (m, p) -> SpectrumEntry
    p_star: int | None       # largest |p| with omega_0(k_p) in the window
    p_max_solved: int

    def in_window_entries(self) -> list[SpectrumEntry]:
        return [e for e in self.entries.values() if e.in_window]


def assemble_spectrum(geom: CylinderGeometry, m_max: int, window: EnergyWindow,
                      policy: GridPolicy | None = None,
                      p_cap: int = 2048) -> CylinderSpectrum:
    """Solve the fiber problem at every mode until band 0 exits the window.

    Requires a sharp wall tall enough (V0 >= E_n(B) + B) that band 0
    leaves the window at large |p| and stays out; the exit is accepted
    after five consecutive modes above the window top on each side.
    """
    pot, B, D = geom.wall, geom.field_b, geom.circumference_d
    if pot.kind != SHARP:
        raise CylinderError("cylinder current estimates require the sharp wall")
    e_n = (2 * window.level_n + 1) * B
    if pot.strength_v0 < e_n + B:
        raise CylinderError(
            f"wall too low: V0={pot.strength_v0} < E_n(B)+B={e_n + B}")

    entries: dict = {}
    p_star = None
    exit_run = 0
    p = 0
    while p <= p_cap:
        above_on_both = True
        for sp in ((1,) if p == 0 else (1, -1)):
            pp = sp * p
            k_p = mode_wavenumber(pp, D)
            grid, pairs = solve_fiber(pot, B, k_p, m_max + 1, policy=policy)
            x = grid.points()
            for m, pair in enumerate(pairs):
                cur = expectation(grid, pair.phi, k_p - B * x)
                entries[(m, pp)] = SpectrumEntry(
                    m, pp, k_p, pair.omega, cur, pair.phi, grid,
                    in_window=bool(window.lo <= pair.omega <= window.hi))
            om0 = pairs[0].omega
            if window.lo <= om0 <= window.hi:
                p_star = abs(pp) if p_star is None else max(p_star, abs(pp))
            if om0 <= window.hi:
                above_on_both = False
        exit_run = exit_run + 1 if above_on_both else 0
        if exit_run >= 5:
            break
        p += 1
    else:
        raise CylinderError(
            f"band 0 never exited the window for |p| <= {p_cap}")
    return CylinderSpectrum(geom, window, entries, p_star, p)


def eigenstate_current(spectrum: CylinderSpectrum, m: int, p: int) -> float:
    """Velocity expectation of the mode eigenstate.

    This is <phi_m(.;k_p), (k_p - Bx) phi_m(.;k_p)>, which equals half
    the band slope omega_m'(k_p) by the Feynman-Hellmann identity.
    """
    try:
        return spectrum.entries[(m, p)].current
    except KeyError:
        raise CylinderError(f"mode (m={m}, p={p}) not in spectrum") from None


@dataclass
class CylinderPacket:
    """Coefficients on the in-window modes, left-weighted by gamma."""

    window: EnergyWindow
    asymmetry_gamma: float
    coeffs: dict             # (m, p) -> beta (real)

    def norm_sq(self) -> float:
        return sum(b * b for b in self.coeffs.values())


def build_cylinder_packet(spectrum: CylinderSpectrum,
                          gamma: float = math.inf) -> CylinderPacket:
    """Uniform weights on the negative-p in-window modes, mirrored by gamma.

    |beta_m^{(-p)}|^2 >= (1+gamma^2) |beta_m^{(p)}|^2 holds with equality;
    gamma = inf puts all weight on p < 0 and gamma = 0 gives the exactly
    symmetric packet.  p = 0 modes only carry weight when gamma = 0.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    plus_scale = 0.0 if math.isinf(gamma) else 1.0 / math.sqrt(1.0 + gamma * gamma)
    sel = sorted((e.m, e.p) for e in spectrum.in_window_entries())
    if not sel:
        raise CylinderError("no in-window modes: empty packet")
    coeffs = {}
    for (m, p) in sel:
        if p < 0:
            coeffs[(m, p)] = 1.0
            if (m, -p) in spectrum.entries and spectrum.entries[(m, -p)].in_window:
                coeffs[(m, -p)] = plus_scale
        elif p == 0:
            coeffs[(m, p)] = 1.0 if gamma == 0.0 else 0.0
    if not any(b != 0 for b in coeffs.values()):
        raise CylinderError("packet has no support (no negative-p in-window modes)")
    norm = math.sqrt(sum(b * b for b in coeffs.values()))
    return CylinderPacket(spectrum.window, gamma,
                          {mp: b / norm for mp, b in coeffs.items()})


def packet_current(spectrum: CylinderSpectrum, packet: CylinderPacket) -> float:
    """Exact finite weighted sum of eigenstate currents (no quadrature)."""
    total = 0.0
    for (m, p), b in sorted(packet.coeffs.items()):
        if (m, p) not in spectrum.entries:
            raise CylinderError(f"packet mode (m={m}, p={p}) missing from spectrum")
        total += b * b * spectrum.entries[(m, p)].current
    return total


@dataclass(frozen=True)
class HarmonicPerturbation:
    """One y-harmonic of a strip-supported perturbation.

    V1(x, y) = profile(x) * cos(2 pi h y / D)  (or sin); the profile must
    vanish outside |x| < L/2 so the perturbation never reaches the walls.
    """

    kind: str                # "cos" | "sin"
    harmonic: int
    profile: object          # callable x -> amplitude

    def __post_init__(self):
        if self.kind not in ("cos", "sin"):
            raise ValueError("harmonic kind must be 'cos' or 'sin'")
        if self.harmonic < 1:
            raise ValueError("harmonic index must be >= 1")


def strip_bump_profile(amplitude: float, L: float):
    """Smooth cos^2 bump supported on |x| < L/2, peak value `amplitude`."""
    def profile(x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < L / 2.0
        return np.where(inside, amplitude * np.cos(math.pi * x / L) ** 2, 0.0)
    return profile


@dataclass
class PerturbedCylinderResult:
    grid: Grid
    modes: list
    unperturbed: list        # (m, p, omega, current) on the shared grid
    eigenvalues: np.ndarray  # perturbed eigenvalues in the enlarged window
    movements: list          # per unperturbed in-window eigenvalue
    v1_sup: float
    packet_gamma: float
    unperturbed_current: float
    projected_current: float
    norm_retention: float


def perturbed_cylinder_project(geom: CylinderGeometry,
                               perturbations: list[HarmonicPerturbation],
                               window: EnergyWindow,
                               outer: tuple[float, float] | None = None,
                               resolution: int = 401,
                               packet_gamma: float = math.inf,
                               p_margin: int = 3,
                               dim_cap: int = 26000,
                               pad_sigmas: float = 8.0) -> PerturbedCylinderResult:
    """Block solve of H0 + V1 on the cylinder and the projected packet current.

    The blocks are the fiber tridiagonals of all retained modes on one
    shared transverse grid; each harmonic couples modes p and p +- h
    through a diagonal profile block.  Eigenpairs are extracted in the
    enlarged window, the unperturbed packet is projected onto their
    span, and its current is re-evaluated there (the velocity operator
    stays block diagonal).  Fails when the truncated dimension exceeds
    dim_cap or the projection loses more than half the packet norm.
    """
    pot, B, D = geom.wall, geom.field_b, geom.circumference_d
    base = assemble_spectrum(geom, 0, window,
                             policy=GridPolicy(n_points=min(resolution, 801)))
    if base.p_star is None:
        raise CylinderError("no in-window band-0 mode; choose another window")
    bandwidth = max(p.harmonic for p in perturbations) if perturbations else 1
    p_lim = base.p_star + bandwidth + p_margin
    modes = list(range(-p_lim, p_lim + 1))

    n_interior = resolution - 2
    dim = len(modes) * n_interior
    if dim > dim_cap:
        raise CylinderError(f"block dimension {dim} exceeds cap {dim_cap}")

    # Shared grid: covers the outermost mode center plus padding, walls
    # and origin on nodes, symmetric box.
    k_lim = mode_wavenumber(p_lim, D)
    w = pad_sigmas / math.sqrt(B)
    if pot.kind == SHARP and pot.strength_v0 > 0:
        w += 1.0 / math.sqrt(pot.strength_v0)
    span = k_lim / B + w
    half = pot.half_width_l / 2.0
    h_raw = 2.0 * span / (resolution - 1)
    m_div = max(2, 2 * round(pot.half_width_l / (2.0 * h_raw)))
    h = pot.half_width_l / m_div
    n_side = int(math.ceil((span - half) / h))
    x_min = -half - n_side * h
    n_points = 2 * (n_side + m_div // 2) + 1
    grid = Grid(x_min, x_min + (n_points - 1) * h, n_points)
    x = grid.points()
    xi = x[1:-1]
    ni = n_points - 2
    dim = len(modes) * ni
    if dim > dim_cap:
        raise CylinderError(f"block dimension {dim} exceeds cap {dim_cap}")
    v0x = pot.evaluate(xi)

    use_complex = any(p.kind == "sin" for p in perturbations)
    H = np.zeros((dim, dim), dtype=complex if use_complex else float)
    idx = np.arange(ni)
    inv_h2 = 1.0 / grid.spacing_h**2

    unperturbed = []
    win_states = []
    for bi, p in enumerate(modes):
        k_p = mode_wavenumber(p, D)
        diag = 2.0 * inv_h2 + (B * xi - k_p) ** 2 + v0x
        sl = slice(bi * ni, (bi + 1) * ni)
        blk = H[sl, sl]
        blk[idx, idx] = diag
        blk[idx[:-1], idx[:-1] + 1] = -inv_h2
        blk[idx[:-1] + 1, idx[:-1]] = -inv_h2
        vals, vecs = eigh_tridiagonal(diag, np.full(ni - 1, -inv_h2), select="i",
                                      select_range=(0, min(window.level_n + 1, ni - 1)))
        for m, om in enumerate(vals):
            if window.lo <= om <= window.hi:
                u = vecs[:, m] / np.linalg.norm(vecs[:, m])
                cur = float(np.sum((k_p - B * xi) * u * u))
                unperturbed.append((m, p, float(om), cur))
                win_states.append((m, p, float(om), cur, bi, u))

    v1_sup = 0.0
    if perturbations:
        v1_sup = float(np.max(sum(np.abs(np.asarray(pb.profile(xi), dtype=float))
                                  for pb in perturbations)))
    for pb in perturbations:
        prof = np.asarray(pb.profile(xi), dtype=float)
        hharm = pb.harmonic
        for bi in range(len(modes) - hharm):
            sl1 = slice(bi * ni, (bi + 1) * ni)
            sl2 = slice((bi + hharm) * ni, (bi + hharm + 1) * ni)
            if pb.kind == "cos":
                cpl = 0.5 * prof
                H[sl1, sl2][idx, idx] += cpl
                H[sl2, sl1][idx, idx] += cpl
            else:
                # sin harmonic couples with a pure phase: (1/2i) e^{...}
                H[sl1, sl2][idx, idx] += 0.5j * prof
                H[sl2, sl1][idx, idx] += -0.5j * prof

    margin = max(2.0 * v1_sup, 1e-9 * window.reference_field)
    if outer is not None:
        ow = EnergyWindow(window.level_n, outer[0], outer[1], window.reference_field)
        lo_e, hi_e = min(ow.lo, window.lo - margin), max(ow.hi, window.hi + margin)
    else:
        lo_e, hi_e = window.lo - margin, window.hi + margin
    vals, vecs = eigh(H, subset_by_value=(lo_e, hi_e), driver="evx")

    movements = []
    for (m, p, om, _cur) in unperturbed:
        if vals.size:
            movements.append({"m": m, "p": p, "omega": om,
                              "moved": float(np.min(np.abs(vals - om)))})
        else:
            movements.append({"m": m, "p": p, "omega": om, "moved": math.inf})

    # Unperturbed packet on the shared grid, then projection.
    plus_scale = 0.0 if math.isinf(packet_gamma) else 1.0 / math.sqrt(1.0 + packet_gamma**2)
    psi = np.zeros(dim)
    cur_unp = 0.0
    weights = []
    for (m, p, om, cur, bi, u) in win_states:
        if p < 0:
            weights.append(((m, p, bi, u), 1.0, cur))
        elif p > 0:
            weights.append(((m, p, bi, u), plus_scale, cur))
        elif packet_gamma == 0.0:
            weights.append(((m, p, bi, u), 1.0, cur))
    wnorm = math.sqrt(sum(s * s for (_state, s, _c) in weights))
    if wnorm == 0.0:
        raise CylinderError("packet has no support on the shared grid")
    for ((m, p, bi, u), s, cur) in weights:
        b = s / wnorm
        psi[bi * ni:(bi + 1) * ni] += b * u
        cur_unp += b * b * cur

    coef = vecs.conj().T @ psi
    psi_proj = vecs @ coef
    retention = float(np.real(np.vdot(psi_proj, psi_proj)))
    if retention < 0.5:
        raise CylinderError(
            f"projection lost {100 * (1 - retention):.1f}% of the packet norm; "
            "enlarged window too tight")
    cur_proj = 0.0
    for bi, p in enumerate(modes):
        k_p = mode_wavenumber(p, D)
        blk = psi_proj[bi * ni:(bi + 1) * ni]
        cur_proj += float(np.real(np.sum((k_p - B * xi) * np.abs(blk) ** 2)))
    cur_proj /= retention

    return PerturbedCylinderResult(
        grid=grid, modes=modes, unperturbed=unperturbed,
        eigenvalues=vals, movements=movements, v1_sup=v1_sup,
        packet_gamma=packet_gamma, unperturbed_current=cur_unp,
        projected_current=cur_proj, norm_retention=retention)
