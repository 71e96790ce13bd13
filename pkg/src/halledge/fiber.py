"""Discretization and eigensolves of the fibered operator.

For each wave number k the transverse problem is the 1D operator

    h0(k) = p_x^2 + (k - B x)^2 + V0(x)

truncated to a box with homogeneous Dirichlet ends and discretized by
second-order central differences.  The box is sized so that the
effective potential at both ends dominates every requested eigenvalue,
which makes the truncation error exponentially small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .potentials import ConfiningPotential, PARABOLIC, SHARP

# Default discretization policy: target spacing with a floor and a cap
# on the point count.  A fixed 4001-point grid misses the 1e-6 relative
# eigenvalue target on wide low-field boxes, hence the spacing target.
DEFAULT_TARGET_SPACING = 4.0e-4
DEFAULT_FLOOR_POINTS = 4001
DEFAULT_CAP_POINTS = 24001
DEFAULT_MAX_POINTS = 200001

# Box ends must dominate the largest requested eigenvalue by this factor.
END_DOMINANCE = 4.0


class GridError(ValueError):
    """Raised when a consistent solver grid cannot be built."""


class FiberSolverError(RuntimeError):
    """Eigensolver failure; carries the band index that was requested."""

    def __init__(self, message: str, band: int | None = None):
        super().__init__(message)
        self.band = band


@dataclass(frozen=True)
class Grid:
    """Uniform grid over [x_min, x_max] with n_points nodes."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (self.x_min < self.x_max):
            raise GridError("grid needs x_min < x_max")
        if self.n_points < 3:
            raise GridError("grid needs at least 3 points")

    @property
    def spacing_h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass(frozen=True)
class GridPolicy:
    """Density controls for build_grid."""

    n_points: int | None = None          # explicit override
    target_spacing: float = DEFAULT_TARGET_SPACING
    floor_points: int = DEFAULT_FLOOR_POINTS
    cap_points: int = DEFAULT_CAP_POINTS
    max_points: int = DEFAULT_MAX_POINTS
    pad_sigmas: float = 8.0


def max_energy_estimate(pot: ConfiningPotential, B: float, k: float, j_max: int) -> float:
    """Generous upper bound on omega_{j_max}(k) used for box sizing."""
    base = (2 * j_max + 1)
    if pot.kind == PARABOLIC:
        bg = math.hypot(B, pot.stiffness_g)
        return base * bg + (pot.stiffness_g / bg) ** 2 * k * k + bg
    if pot.kind == SHARP:
        return base * B + pot.strength_v0 + B
    # Free or power: oscillator levels plus the wall value over the
    # classical spread of the highest requested state.
    spread = abs(k) / B + 4.0 * math.sqrt((2 * j_max + 3) / B)
    return base * B + 2.0 * float(pot.evaluate(spread)) + B


def build_grid(B: float, k: float, pot: ConfiningPotential, max_energy: float,
               pad_sigmas: float | None = None, policy: GridPolicy | None = None) -> Grid:
    """Box and grid for the fiber problem at wave number k.

    The box covers [min(-L/2, k/B) - w, max(L/2, k/B) + w] with
    w = pad_sigmas/sqrt(B) (plus the wall penetration depth 1/sqrt(V0)
    for a sharp wall taller than max_energy) and is then widened until
    the effective potential at both ends is at least 4*max_energy.  For
    wall potentials the spacing is snapped so that x = +-L/2 and x = 0
    land exactly on grid nodes.
    """
    if B <= 0:
        raise GridError("field strength B must be positive")
    if max_energy <= 0:
        raise GridError("max_energy must be positive")
    policy = policy or GridPolicy()
    pad = policy.pad_sigmas if pad_sigmas is None else pad_sigmas

    half = pot.half_width_l / 2.0 if pot.is_wall else 0.0
    w = pad / math.sqrt(B)
    if pot.kind == SHARP and pot.strength_v0 > max_energy:
        w += 1.0 / math.sqrt(pot.strength_v0)
    lo = min(-half, k / B) - w
    hi = max(half, k / B) + w

    # Widen until the box ends are classically forbidden with margin.
    step = 1.0 / math.sqrt(B)
    target = END_DOMINANCE * max_energy

    def v_eff(x: float) -> float:
        return (B * x - k) ** 2 + float(pot.evaluate(x))

    guard = 0
    while v_eff(lo) < target:
        lo -= step
        guard += 1
        if guard > 10000:
            raise GridError("box expansion did not terminate on the left")
    guard = 0
    while v_eff(hi) < target:
        hi += step
        guard += 1
        if guard > 10000:
            raise GridError("box expansion did not terminate on the right")

    span = hi - lo
    if policy.n_points is not None:
        n = policy.n_points
    else:
        n = int(math.ceil(span / policy.target_spacing)) + 1
        n = min(max(n, policy.floor_points), policy.cap_points)
    if n > policy.max_points:
        raise GridError(f"grid would need {n} points (max {policy.max_points})")

    if pot.is_wall:
        # Snap so that both walls and the origin are grid nodes: the
        # spacing must divide L with an even quotient.
        h_raw = span / (n - 1)
        m = max(2, 2 * round(pot.half_width_l / (2.0 * h_raw)))
        h = pot.half_width_l / m
        lo = half - math.ceil((half - lo) / h) * h
        n = int(math.ceil((hi - lo) / h)) + 1
        if n % 2 == 0:
            n += 1
        hi = lo + (n - 1) * h
        if n > policy.max_points:
            raise GridError(f"grid would need {n} points (max {policy.max_points})")
    elif n % 2 == 0:
        n += 1

    return Grid(lo, hi, n)


@dataclass(frozen=True)
class FiberHamiltonian:
    """Sampled fiber operator h0(k) on its grid."""

    field_b: float
    wave_number_k: float
    potential: ConfiningPotential
    grid: Grid
    effective_potential: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, pot: ConfiningPotential, B: float, k: float,
              max_energy: float | None = None, j_max: int = 0,
              policy: GridPolicy | None = None) -> "FiberHamiltonian":
        if max_energy is None:
            max_energy = max_energy_estimate(pot, B, k, j_max)
        grid = build_grid(B, k, pot, max_energy, policy=policy)
        x = grid.points()
        veff = (B * x - k) ** 2 + pot.evaluate(x)
        return cls(B, k, pot, grid, veff)


def assemble(h: FiberHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric tridiagonal matrix on the interior nodes (Dirichlet ends)."""
    dx = h.grid.spacing_h
    diag = 2.0 / dx**2 + h.effective_potential[1:-1]
    off = np.full(h.grid.n_points - 3, -1.0 / dx**2)
    return diag, off


@dataclass
class EigenPair:
    """Eigenvalue with its grid-sampled, unit-L2-norm eigenfunction."""

    band_index_j: int
    omega: float
    phi: np.ndarray
    residual: float


def eigen_lowest(diag: np.ndarray, off: np.ndarray, count: int,
                 spacing_h: float) -> list[EigenPair]:
    """The `count` lowest eigenpairs of a symmetric tridiagonal matrix.

    Eigenvalues come from Sturm-sequence bisection and eigenvectors from
    inverse iteration (LAPACK stebz/stein); the dense QR path is a rare
    fallback when inverse iteration fails to converge.  Eigenfunctions
    are returned on the full grid (zeros at the Dirichlet ends),
    normalized so the trapezoid-rule L2 norm is one, with the sign fixed
    positive at the node of largest magnitude.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if count > diag.size:
        raise FiberSolverError(
            f"requested {count} bands from a matrix of size {diag.size}", band=count - 1)
    try:
        vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                      select_range=(0, count - 1))
    except np.linalg.LinAlgError:
        try:
            # retry with loosened bisection brackets (shifts the inverse
            # iteration seeds); full decomposition only on small matrices,
            # its workspace is quadratic
            vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                          select_range=(0, count - 1),
                                          tol=1e-8)
        except np.linalg.LinAlgError as exc:
            if diag.size > 5000:
                raise FiberSolverError(
                    f"tridiagonal eigensolver failed: {exc}",
                    band=count - 1) from exc
            try:
                vals, vecs = eigh_tridiagonal(diag, off)
                vals, vecs = vals[:count], vecs[:, :count]
            except np.linalg.LinAlgError as exc2:
                raise FiberSolverError(
                    f"tridiagonal eigensolver failed: {exc2}",
                    band=count - 1) from exc2

    pairs = []
    for j in range(count):
        u = vecs[:, j]
        norm = math.sqrt(spacing_h) * float(np.linalg.norm(u))
        phi = np.zeros(diag.size + 2)
        phi[1:-1] = u / norm
        i_max = int(np.argmax(np.abs(phi)))
        if phi[i_max] < 0:
            phi = -phi
        resid = diag * phi[1:-1]
        resid[:-1] += off * phi[2:-1]
        resid[1:] += off * phi[1:-2]
        resid -= vals[j] * phi[1:-1]
        pairs.append(EigenPair(j, float(vals[j]), phi,
                               math.sqrt(spacing_h) * float(np.linalg.norm(resid))))
    return pairs


def solve_fiber(pot: ConfiningPotential, B: float, k: float, count: int,
                policy: GridPolicy | None = None,
                max_energy: float | None = None) -> tuple[Grid, list[EigenPair]]:
    """Convenience wrapper: grid, assembly and the lowest `count` bands."""
    ham = FiberHamiltonian.build(pot, B, k, max_energy=max_energy,
                                 j_max=count - 1, policy=policy)
    diag, off = assemble(ham)
    try:
        pairs = eigen_lowest(diag, off, count, ham.grid.spacing_h)
    except FiberSolverError as exc:
        raise FiberSolverError(f"fiber solve failed at k={k}: {exc}",
                               band=exc.band) from exc
    return ham.grid, pairs


def expectation(grid: Grid, phi: np.ndarray, weight: np.ndarray) -> float:
    """Trapezoid-rule value of the integral of weight * phi^2."""
    if phi.shape[0] != grid.n_points or weight.shape[0] != grid.n_points:
        raise GridError("phi/weight sampled on a different grid")
    integrand = weight * phi * phi
    return float(np.trapezoid(integrand, dx=grid.spacing_h))


def trace_value(grid: Grid, phi: np.ndarray, x: float) -> float:
    """Cubic (4-point Lagrange) interpolation of phi at x."""
    if phi.shape[0] != grid.n_points:
        raise GridError("phi sampled on a different grid")
    h = grid.spacing_h
    if not (grid.x_min - 1e-9 * h <= x <= grid.x_max + 1e-9 * h):
        raise GridError(f"x={x} outside grid range")
    t = (x - grid.x_min) / h
    i = int(math.floor(t))
    frac = t - i
    if abs(frac) < 1e-9:
        return float(phi[min(max(i, 0), grid.n_points - 1)])
    if abs(frac - 1.0) < 1e-9:
        return float(phi[min(i + 1, grid.n_points - 1)])
    i0 = min(max(i - 1, 0), grid.n_points - 4)
    s = t - i0
    val = 0.0
    for m in range(4):
        lm = 1.0
        for r in range(4):
            if r != m:
                lm *= (s - r) / (m - r)
        val += lm * phi[i0 + m]
    return float(val)
