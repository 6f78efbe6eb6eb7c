"""Desk-scale mapping-torus plug on the unit disc.

The plug map is a composition of rotation atoms: one local negative rotation
per necklace bead (supported strictly inside the bead) followed by a global
twist that is exactly a 1/n turn on the core and the identity outside
``outer_radius``.  Bead cores therefore translate rigidly bead-to-bead and
close up after n steps, while an annulus near the boundary is fixed
pointwise.

Alongside the map the plug carries:

* an invariant Morse "necklace" function (ring well + one bead cap per
  site, radial about each bead center on the region the bead atom moves);
* the exact generating function tau (closed-form atom potentials, no
  quadrature), positive everywhere and equal to ``boundary_value`` on the
  identity annulus, so the minimal orbit action is scale * boundary_value;
* a contract verifier that re-derives everything by independent numerics
  (finite-difference Jacobians, Gauss edge integrals, critical-point
  census, periodic-orbit search).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .discmap import (
    DiscMap,
    RadialProfile,
    RotationAtom,
    fd_jacobian,
    line_integral_sigma,
    line_integral_sigma_dense,
    smoothstep,
    smoothstep_deriv,
)
from .errors import (
    BeadOutsideSector,
    BeadOverlap,
    ContractViolation,
    InvalidGeometry,
    InvalidNecklaceTopology,
    NoOrbitsFound,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Morse necklace
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NecklaceSpec:
    """Invariant Morse function parameters.

    ``ring_width`` defaults to 3 * ring_radius / sites, which makes the
    angular and radial stiffness at each bead minimum differ by exactly a
    factor 2; that bounded anisotropy is what keeps the bead-cap blend from
    introducing spurious critical points.  ``bead_sites`` may list explicit
    (radius, angle) pairs; they must lie on one common circle at equal
    angular spacing.
    """

    n_sectors: int
    beads_per_sector: int = 1
    ring_radius: float = 0.3
    ring_width: float | None = None
    bead_radius: float = 0.018
    collar_width: float | None = None
    amplitude: float = 1.0
    bead_phase: float = 0.0
    bead_sites: tuple[tuple[float, float], ...] | None = None

    @property
    def site_count(self) -> int:
        return self.n_sectors * self.beads_per_sector

    def resolved_ring_width(self) -> float:
        if self.ring_width is not None:
            return self.ring_width
        return 3.0 * self.ring_radius / self.site_count

    def resolved_collar(self) -> float:
        if self.collar_width is not None:
            return self.collar_width
        half_gap = self.ring_radius * math.sin(math.pi / self.site_count)
        return min(0.034, 0.85 * half_gap - self.bead_radius)


def _equal_spacing(angles: np.ndarray) -> bool:
    step = TWO_PI / len(angles)
    rel = np.sort(np.mod(angles - angles[0], TWO_PI))
    return bool(np.allclose(rel, step * np.arange(len(angles)), atol=1e-9))


class MorseNecklace:
    """h = ring well + bead caps; radial about each bead center inside the
    bead, hence invariant under the plug map by construction."""

    def __init__(self, spec: NecklaceSpec):
        m = spec.site_count
        if spec.n_sectors < 1 or spec.beads_per_sector < 1:
            raise InvalidNecklaceTopology("need at least one sector and one bead")
        r_b = spec.ring_radius
        w = spec.resolved_ring_width()
        collar = spec.resolved_collar()
        if not 0 < w < r_b:
            raise InvalidNecklaceTopology(
                f"ring width {w:.4g} must lie strictly between 0 and the ring radius"
            )
        if r_b + w >= 1.0:
            raise InvalidNecklaceTopology("ring well must fit inside the unit disc")
        if collar <= 0:
            raise BeadOverlap("collar width is not positive; beads are too crowded")
        blend_outer = spec.bead_radius + collar
        half_gap = r_b * math.sin(math.pi / m) if m > 1 else math.inf
        if blend_outer >= half_gap:
            raise BeadOverlap(
                f"bead influence radius {blend_outer:.4g} reaches past the "
                f"half-spacing {half_gap:.4g}"
            )
        if spec.bead_sites is not None:
            sites = np.asarray(spec.bead_sites, dtype=float)
            if sites.shape != (m, 2):
                raise InvalidNecklaceTopology(
                    f"expected {m} bead sites, got {sites.shape}"
                )
            radii = sites[:, 0]
            if not np.allclose(radii, radii[0], atol=1e-12):
                raise InvalidNecklaceTopology("beads must sit on a common circle")
            if m > 1 and not _equal_spacing(sites[:, 1]):
                raise InvalidNecklaceTopology("beads must be equally spaced in angle")
            angles = sites[:, 1]
        else:
            angles = spec.bead_phase + TWO_PI * np.arange(m) / m
        self.spec = spec
        self.site_count = m
        self.ring_radius = r_b
        self.ring_width = w
        self.collar = collar
        self.blend_outer = blend_outer
        self.amplitude = spec.amplitude
        # ring-well depth tied to geometry: 6*kB/w^2 == 4*kA*r_b^2, so the
        # radial stiffness at each bead minimum is exactly 12*kA*r_b^2
        self.bump_depth = (2.0 / 3.0) * spec.amplitude * r_b**2 * w**2
        self.bead_angles = np.asarray(angles, dtype=float)
        self.bead_centers = r_b * np.stack(
            [np.cos(self.bead_angles), np.sin(self.bead_angles)], axis=-1
        )
        self._phase = float(self.bead_angles[0])
        self._cap = self._build_cap()

    # -- ring part ---------------------------------------------------------

    def ring_value(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        r = np.hypot(x, y)
        theta = np.arctan2(y, x)
        well = self.amplitude * (r**2 - self.ring_radius**2) ** 2
        xw = (r - self.ring_radius) / self.ring_width
        bump = np.where(np.abs(xw) < 1.0, (1.0 - np.clip(xw, -1, 1) ** 2) ** 3, 0.0)
        osc = np.cos(self.site_count * (theta - self._phase))
        return well - self.bump_depth * bump * osc

    def ring_gradient(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        r = np.hypot(x, y)
        safe = np.where(r > 1e-12, r, 1.0)
        theta = np.arctan2(y, x)
        m = self.site_count
        xw = (r - self.ring_radius) / self.ring_width
        inside = np.abs(xw) < 1.0
        xc = np.clip(xw, -1, 1)
        bump = np.where(inside, (1.0 - xc**2) ** 3, 0.0)
        dbump = np.where(inside, -6.0 * xc * (1.0 - xc**2) ** 2 / self.ring_width, 0.0)
        osc = np.cos(m * (theta - self._phase))
        dosc = -m * np.sin(m * (theta - self._phase))
        d_r = (
            4.0 * self.amplitude * r * (r**2 - self.ring_radius**2)
            - self.bump_depth * dbump * osc
        )
        d_theta = -self.bump_depth * bump * dosc
        grad = np.empty_like(pts)
        rhat_x, rhat_y = x / safe, y / safe
        grad[..., 0] = d_r * rhat_x - d_theta * rhat_y / safe
        grad[..., 1] = d_r * rhat_y + d_theta * rhat_x / safe
        grad[r <= 1e-12] = 0.0
        return grad

    # -- bead caps ----------------------------------------------------------

    def _build_cap(self) -> CubicSpline:
        c = self.bead_centers[0]
        s_nodes = np.linspace(0.0, 1.05 * self.blend_outer, 385)
        psis = np.linspace(0.0, TWO_PI, 512, endpoint=False)
        ring_pts = (
            c[None, None, :]
            + s_nodes[:, None, None]
            * np.stack([np.cos(psis), np.sin(psis)], axis=-1)[None, :, :]
        )
        vals = self.ring_value(ring_pts).mean(axis=1)
        return CubicSpline(s_nodes, vals)

    def _chi(self, s: np.ndarray) -> np.ndarray:
        return 1.0 - smoothstep((s - self.spec.bead_radius) / self.collar)

    def _dchi(self, s: np.ndarray) -> np.ndarray:
        return -smoothstep_deriv((s - self.spec.bead_radius) / self.collar) / self.collar

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        h = self.ring_value(pts)
        flat_pts = pts.reshape(-1, 2)
        flat_h = h.reshape(-1)
        for c in self.bead_centers:
            d = flat_pts - c
            s = np.hypot(d[:, 0], d[:, 1])
            mask = s < self.blend_outer
            if not mask.any():
                continue
            chi = self._chi(s[mask])
            flat_h[mask] += chi * (self._cap(s[mask]) - flat_h[mask])
        return flat_h.reshape(h.shape)

    def gradient(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        grad = self.ring_gradient(pts)
        flat_pts = pts.reshape(-1, 2)
        flat_g = grad.reshape(-1, 2)
        ring = self.ring_value(pts).reshape(-1)
        for c in self.bead_centers:
            d = flat_pts - c
            s = np.hypot(d[:, 0], d[:, 1])
            mask = s < self.blend_outer
            if not mask.any():
                continue
            sm = s[mask]
            safe = np.where(sm > 1e-12, sm, 1.0)
            shat = d[mask] / safe[:, None]
            chi = self._chi(sm)
            dchi = self._dchi(sm)
            cap = self._cap(sm)
            dcap = self._cap(sm, 1)
            radial = dchi * (cap - ring[mask]) + chi * dcap
            radial = np.where(sm > 1e-12, radial, 0.0)
            flat_g[mask] = (
                (1.0 - chi)[:, None] * flat_g[mask] + radial[:, None] * shat
            )
        return flat_g.reshape(grad.shape)

    def expected_census(self) -> tuple[int, int, int]:
        m = self.site_count
        return (m, m, 1)


def build_morse_necklace(spec: NecklaceSpec) -> MorseNecklace:
    return MorseNecklace(spec)


# ---------------------------------------------------------------------------
# Critical-point census (shared with the annulus extension)
# ---------------------------------------------------------------------------


@dataclass
class CriticalPoint:
    location: tuple[float, float]
    value: float
    index: int  # 0 minimum, 1 saddle, 2 maximum
    hessian_eigs: tuple[float, float]


@dataclass
class CriticalCensus:
    minima: list[CriticalPoint]
    saddles: list[CriticalPoint]
    maxima: list[CriticalPoint]

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.minima), len(self.saddles), len(self.maxima))

    @property
    def euler_characteristic(self) -> int:
        return len(self.minima) - len(self.saddles) + len(self.maxima)

    @property
    def all_points(self) -> list[CriticalPoint]:
        return self.minima + self.saddles + self.maxima


def _damped_solve(mats: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Least-squares solve of batched 2x2 systems, stable when a system is
    singular (circle families): delta = A^T (A A^T + eps I)^(-1) rhs."""
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, d = mats[:, 1, 0], mats[:, 1, 1]
    g11 = a * a + b * b
    g12 = a * c + b * d
    g22 = c * c + d * d
    eps = 1e-13 * np.maximum(1.0, g11 + g22)
    det = (g11 + eps) * (g22 + eps) - g12 * g12
    y0 = ((g22 + eps) * rhs[:, 0] - g12 * rhs[:, 1]) / det
    y1 = (-g12 * rhs[:, 0] + (g11 + eps) * rhs[:, 1]) / det
    out = np.empty_like(rhs)
    out[:, 0] = a * y0 + c * y1
    out[:, 1] = b * y0 + d * y1
    return out


def fd_hessian(grad_fn, pts: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Hessian from a gradient field (symmetrized)."""
    pts = np.asarray(pts, dtype=float)
    hess = np.empty(pts.shape[:-1] + (2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = 1.0
        gp = grad_fn(pts + h * e)
        gm = grad_fn(pts - h * e)
        d = (gp - gm) / (2 * h)
        hess[..., 0, k] = d[..., 0]
        hess[..., 1, k] = d[..., 1]
    return 0.5 * (hess + np.swapaxes(hess, -1, -2))


def critical_census(
    value_fn,
    grad_fn,
    seeds: np.ndarray,
    domain_mask,
    grad_tol: float = 1e-10,
    dedupe_tol: float = 1e-6,
    max_iter: int = 60,
    degenerate_tol: float = 1e-7,
) -> CriticalCensus:
    """Newton census of critical points from a deterministic seed cloud.

    ``domain_mask(points) -> bool array`` restricts to the open region of
    interest; classification uses a finite-difference Hessian.
    """
    z = np.array(seeds, dtype=float).reshape(-1, 2)
    for _ in range(max_iter):
        g = grad_fn(z)
        hess = fd_hessian(grad_fn, z)
        step = _damped_solve(hess.reshape(-1, 2, 2), g.reshape(-1, 2))
        norm = np.hypot(step[:, 0], step[:, 1])
        step = step * (np.minimum(norm, 0.05) / np.where(norm > 0, norm, 1.0))[:, None]
        z = z - step
    g = grad_fn(z)
    ok = (np.hypot(g[:, 0], g[:, 1]) < grad_tol) & domain_mask(z)
    z = z[ok]
    found: list[CriticalPoint] = []
    for p in z:
        if any(
            math.hypot(p[0] - q.location[0], p[1] - q.location[1]) < dedupe_tol
            for q in found
        ):
            continue
        hess = fd_hessian(grad_fn, p[None, :])[0]
        eigs = np.linalg.eigvalsh(hess)
        if np.min(np.abs(eigs)) < degenerate_tol:
            continue
        index = int(np.sum(eigs < 0))
        found.append(
            CriticalPoint(
                location=(float(p[0]), float(p[1])),
                value=float(np.asarray(value_fn(p[None, :])).reshape(-1)[0]),
                index={0: 0, 1: 1, 2: 2}[index],
                hessian_eigs=(float(eigs[0]), float(eigs[1])),
            )
        )
    return CriticalCensus(
        minima=[p for p in found if p.index == 0],
        saddles=[p for p in found if p.index == 1],
        maxima=[p for p in found if p.index == 2],
    )


def necklace_census_seeds(necklace: MorseNecklace, radius: float = 0.97) -> np.ndarray:
    rs = np.linspace(0.02, radius, 40)
    thetas = np.linspace(0.0, TWO_PI, 8 * necklace.site_count, endpoint=False)
    rg, tg = np.meshgrid(rs, thetas, indexing="ij")
    grid = np.stack([rg * np.cos(tg), rg * np.sin(tg)], axis=-1).reshape(-1, 2)
    m = necklace.site_count
    mid_angles = necklace.bead_angles + math.pi / m
    mids = necklace.ring_radius * np.stack(
        [np.cos(mid_angles), np.sin(mid_angles)], axis=-1
    )
    return np.concatenate([grid, necklace.bead_centers, mids, [[0.0, 0.0]]])


def verify_necklace_census(
    necklace: MorseNecklace, radius: float = 0.97
) -> CriticalCensus:
    seeds = necklace_census_seeds(necklace, radius)

    def mask(pts):
        return np.hypot(pts[:, 0], pts[:, 1]) < radius

    return critical_census(necklace, necklace.gradient, seeds, mask)


# ---------------------------------------------------------------------------
# Plug construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlugSpec:
    """Parameters of the desk-scale plug (unit-disc model scaled by ``scale``).

    The twist profile drops from a full 1/n turn on the core to zero at
    ``1 - margin`` along a quintic ramp; bead atoms undo that turn locally
    with a smoother (C^4) ramp supported strictly inside each bead, which
    keeps finite-difference Jacobian checks well-conditioned.
    """

    n: int
    scale: float = 1.0
    boundary_value: float = 1.0
    margin: float = 0.1
    core_radius: float = 0.56
    beads_per_sector: int = 1
    ring_radius: float = 0.3
    ring_width: float | None = None
    bead_radius: float = 0.018
    collar_width: float | None = None
    amplitude: float = 1.0
    bead_phase: float = 0.0
    bead_ramp_inner: float = 0.55
    bead_ramp_outer: float = 0.9

    @property
    def outer_radius(self) -> float:
        return 1.0 - self.margin

    def necklace_spec(self) -> NecklaceSpec:
        return NecklaceSpec(
            n_sectors=self.n,
            beads_per_sector=self.beads_per_sector,
            ring_radius=self.ring_radius,
            ring_width=self.ring_width,
            bead_radius=self.bead_radius,
            collar_width=self.collar_width,
            amplitude=self.amplitude,
            bead_phase=self.bead_phase,
        )


class Plug:
    def __init__(self, spec: PlugSpec, disc_map: DiscMap, necklace: MorseNecklace):
        self.spec = spec
        self.map = disc_map
        self.necklace = necklace
        self.outer_radius = spec.outer_radius
        self.core_radius = spec.core_radius
        self.bead_centers = necklace.bead_centers
        beta_in = spec.bead_ramp_inner * spec.bead_radius
        beta_out = spec.bead_ramp_outer * spec.bead_radius
        self.kink_circles = [((0.0, 0.0), spec.core_radius), ((0.0, 0.0), spec.outer_radius)]
        for c in necklace.bead_centers:
            self.kink_circles.append(((float(c[0]), float(c[1])), beta_in))
            self.kink_circles.append(((float(c[0]), float(c[1])), beta_out))

    def phi(self, pts: np.ndarray) -> np.ndarray:
        return self.map(pts)

    def phi_n(self, pts: np.ndarray, n: int) -> np.ndarray:
        return self.map.apply_n(pts, n)

    def tau(self, pts: np.ndarray) -> np.ndarray:
        return self.map.action_potential(pts, self.spec.boundary_value)

    def invariant_function(self, pts: np.ndarray) -> np.ndarray:
        return self.necklace(pts)

    def invariance_error(self, n_grid: int = 200) -> float:
        xs = np.linspace(-1.0, 1.0, n_grid)
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        pts = np.stack([gx, gy], axis=-1).reshape(-1, 2)
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0]
        h0 = self.necklace(pts)
        h1 = self.necklace(self.map(pts))
        return float(np.max(np.abs(h1 - h0)))

    def volume(self, n_r: int = 1024, n_theta: int = 512) -> float:
        """scale^2 * integral of tau over the unit disc."""
        rs = np.linspace(0.0, 1.0, n_r + 1)
        thetas = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
        rg, tg = np.meshgrid(rs, thetas, indexing="ij")
        pts = np.stack([rg * np.cos(tg), rg * np.sin(tg)], axis=-1)
        tau = self.tau(pts.reshape(-1, 2)).reshape(n_r + 1, n_theta)
        radial = (tau * rs[:, None]).mean(axis=1) * TWO_PI
        integral = np.trapezoid(radial, rs)
        return float(self.spec.scale**2 * integral)

    def min_tau(self, n_r: int = 512, n_theta: int = 256) -> float:
        rs = np.linspace(0.0, 1.0, n_r + 1)
        thetas = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
        rg, tg = np.meshgrid(rs, thetas, indexing="ij")
        pts = np.stack([rg * np.cos(tg), rg * np.sin(tg)], axis=-1).reshape(-1, 2)
        return float(self.tau(pts).min())


def build_plug(spec: PlugSpec) -> Plug:
    if spec.n < 2:
        raise InvalidGeometry("need at least two sectors for a plug")
    if not 0 < spec.margin < 1:
        raise InvalidGeometry("margin must lie in (0, 1)")
    if not 0 < spec.core_radius < spec.outer_radius:
        raise InvalidGeometry(
            f"core radius {spec.core_radius} must lie inside the identity "
            f"annulus start {spec.outer_radius}"
        )
    if not 0 < spec.bead_ramp_inner < spec.bead_ramp_outer < 1.0:
        raise InvalidGeometry("bead ramp fractions must satisfy 0 < inner < outer < 1")
    necklace = build_morse_necklace(spec.necklace_spec())
    ring_outer = necklace.ring_radius + necklace.ring_width
    if ring_outer >= spec.core_radius:
        raise InvalidGeometry(
            f"ring well extends to {ring_outer:.4g}, outside the core "
            f"radius {spec.core_radius}"
        )
    beta_out = spec.bead_ramp_outer * spec.bead_radius
    if necklace.ring_radius + beta_out >= spec.core_radius:
        raise BeadOutsideSector(
            "bead atom support must sit strictly inside the rigidly rotating core"
        )
    angle = TWO_PI / spec.n
    bead_profile = RadialProfile(
        inner_angle=-angle,
        inner_radius=spec.bead_ramp_inner * spec.bead_radius,
        outer_radius=beta_out,
        smoothness=4,
    )
    atoms = [RotationAtom((float(c[0]), float(c[1])), bead_profile) for c in necklace.bead_centers]
    twist = RadialProfile(
        inner_angle=angle,
        inner_radius=spec.core_radius,
        outer_radius=spec.outer_radius,
        smoothness=2,
    )
    atoms.append(RotationAtom((0.0, 0.0), twist))
    return Plug(spec, DiscMap(atoms), necklace)


# ---------------------------------------------------------------------------
# Periodic orbits
# ---------------------------------------------------------------------------


@dataclass
class PeriodicOrbit:
    period: int
    points: np.ndarray
    action: float
    is_circle_family: bool


@dataclass
class PeriodicOrbitReport:
    orbits: list[PeriodicOrbit]
    has_identity_annulus: bool
    identity_action: float
    k_max: int

    @property
    def min_action(self) -> float:
        best = math.inf
        if self.has_identity_annulus:
            best = self.identity_action
        for orb in self.orbits:
            best = min(best, orb.action)
        return best


def _orbit_seeds(plug: Plug, grid: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(protected, scan) seed points.  Protected seeds (disc center, bead
    centers, small rings inside each bead core) bypass the spatial thinning:
    in rigidly rotating regions every grid point ties at roundoff-level
    displacement, and the marked representatives would lose those ties."""
    rng = np.random.default_rng(seed)
    spacing = 2.0 / grid
    offset = rng.uniform(0.0, spacing, size=2)
    xs = -1.0 + offset[0] + spacing * np.arange(grid)
    ys = -1.0 + offset[1] + spacing * np.arange(grid)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx, gy], axis=-1).reshape(-1, 2)
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) < plug.outer_radius - 0.01]
    protected = [np.zeros((1, 2)), plug.bead_centers]
    core_s = 0.5 * plug.spec.bead_ramp_inner * plug.spec.bead_radius
    ring = np.stack([np.cos([0.0, 1.6, 3.2, 4.8]), np.sin([0.0, 1.6, 3.2, 4.8])], axis=-1)
    for c in plug.bead_centers:
        protected.append(c + core_s * ring)
    scan = [pts]
    radial = np.linspace(0.01, plug.outer_radius - 0.02, 160)
    for ang in offset[0] + np.linspace(0.0, TWO_PI, 8, endpoint=False):
        scan.append(np.stack([radial * np.cos(ang), radial * np.sin(ang)], axis=-1))
    return np.concatenate(protected), np.concatenate(scan)


def find_periodic_points(
    plug: Plug,
    k_max: int | None = None,
    grid: int = 128,
    seed: int = 0,
    displacement_threshold: float = 0.08,
    newton_iters: int = 12,
    converge_tol: float = 1e-12,
    max_candidates: int = 256,
) -> PeriodicOrbitReport:
    """Deterministic periodic-point search: grid + targeted seeds, a
    displacement scan for each step count, then batched Newton with a
    damped least-squares step (circle families give singular systems)."""
    if k_max is None:
        k_max = 2 * plug.spec.n + 1
    protected, scan = _orbit_seeds(plug, grid, seed)
    seeds = np.concatenate([protected, scan])
    n_protected = len(protected)
    orbits: list[PeriodicOrbit] = []
    scale = plug.spec.scale
    iterate = seeds.copy()
    for k in range(1, k_max + 1):
        iterate = plug.map(iterate)
        disp = np.hypot(*(iterate - seeds).T)
        below = disp < displacement_threshold
        if not below.any():
            continue
        keep_protected = np.nonzero(below[:n_protected])[0]
        scan_idx = n_protected + np.nonzero(below[n_protected:])[0]
        # spatial thinning: one scan candidate per coarse cell, best
        # displacement; protected seeds are exempt
        cells: dict[tuple[int, int], int] = {}
        for i in scan_idx:
            p = seeds[i]
            key = (int(p[0] / 0.03), int(p[1] / 0.03))
            if key not in cells or disp[i] < disp[cells[key]]:
                cells[key] = i
        order = sorted(cells.values())
        if len(order) > max_candidates:
            order = sorted(order, key=lambda i: disp[i])[:max_candidates]
        z = seeds[np.concatenate([keep_protected, np.array(sorted(order), dtype=int)])].copy()
        # batched Newton on phi^k(z) - z; candidates on exactly periodic
        # regions drop out of the active set after the first residual check
        active = np.arange(len(z))
        for _ in range(newton_iters):
            img, jac = plug.map.flow(z[active], k)
            res = img - z[active]
            live = np.hypot(res[:, 0], res[:, 1]) > 0.1 * converge_tol
            active = active[live]
            if len(active) == 0:
                break
            res = res[live]
            jac = jac[live]
            jac[:, 0, 0] -= 1.0
            jac[:, 1, 1] -= 1.0
            step = _damped_solve(jac, res)
            norm = np.hypot(step[:, 0], step[:, 1])
            cap = np.minimum(norm, 0.08)
            z[active] = z[active] - step * (cap / np.where(norm > 0, norm, 1.0))[:, None]
        res = plug.phi_n(z, k) - z
        good = (np.hypot(res[:, 0], res[:, 1]) < converge_tol) & (
            np.hypot(z[:, 0], z[:, 1]) < plug.outer_radius - 1e-9
        )
        pts_k = z[good]
        if len(pts_k) == 0:
            continue
        # minimal-period filter, batched over proper divisors; smaller
        # periods were already recorded when scanning that step count
        minimal = np.ones(len(pts_k), dtype=bool)
        for d in range(1, k):
            if k % d == 0:
                img = plug.phi_n(pts_k, d)
                back = np.hypot(img[:, 0] - pts_k[:, 0], img[:, 1] - pts_k[:, 1]) < 1e-9
                minimal &= ~back
        pts_k = pts_k[minimal]
        if len(pts_k) == 0:
            continue
        # trajectories, actions, and family flags in one batch
        traj = np.empty((len(pts_k), k, 2))
        cur = pts_k
        for j in range(k):
            traj[:, j] = cur
            cur = plug.phi(cur)
        actions = scale * plug.tau(traj.reshape(-1, 2)).reshape(len(pts_k), k).sum(axis=1)
        jac = plug.map.jacobian_n(pts_k, k)
        jac[:, 0, 0] -= 1.0
        jac[:, 1, 1] -= 1.0
        svals = np.linalg.svd(jac, compute_uv=False)
        families = svals[:, -1] < 1e-6 * np.maximum(1.0, svals[:, 0])
        for i in range(len(pts_k)):
            if _is_new_orbit(orbits, k, traj[i], float(actions[i]), bool(families[i])):
                orbits.append(
                    PeriodicOrbit(
                        period=k,
                        points=traj[i],
                        action=float(actions[i]),
                        is_circle_family=bool(families[i]),
                    )
                )
    orbits.sort(key=lambda o: (o.period, o.action))
    return PeriodicOrbitReport(
        orbits=orbits[:200],
        has_identity_annulus=True,
        identity_action=float(scale * plug.spec.boundary_value),
        k_max=k_max,
    )


def _is_new_orbit(
    orbits: list[PeriodicOrbit],
    period: int,
    pts: np.ndarray,
    action: float,
    family: bool,
) -> bool:
    for orb in orbits:
        if orb.period != period:
            continue
        dists = np.hypot(
            pts[:, None, 0] - orb.points[None, :, 0],
            pts[:, None, 1] - orb.points[None, :, 1],
        )
        if dists.min() < 1e-6:
            return False
        if (
            family
            and orb.is_circle_family
            and abs(action - orb.action) < 1e-6
            and abs(
                np.hypot(pts[:, 0], pts[:, 1]).mean()
                - np.hypot(orb.points[:, 0], orb.points[:, 1]).mean()
            )
            < 1e-3
        ):
            return False
    return True


def min_action(plug: Plug, report: PeriodicOrbitReport | None = None) -> float:
    if report is None:
        report = find_periodic_points(plug)
    if not report.orbits and not report.has_identity_annulus:
        raise NoOrbitsFound("no periodic orbits located")
    return report.min_action


# ---------------------------------------------------------------------------
# Contract verification
# ---------------------------------------------------------------------------


@dataclass
class PlugContractReport:
    boundary_error: float
    max_det_error: float
    min_tau: float
    dtau_residual: float
    invariance_error: float
    min_action: float
    identity_action: float
    volume: float
    census_counts: tuple[int, int, int]
    expected_census: tuple[int, int, int]
    orbit_report: PeriodicOrbitReport
    passed: bool
    failures: list[str]


def _edge_residuals(plug: Plug, n_r: int, n_theta: int) -> float:
    """max |tau(b) - tau(a) - int_a^b sigma| over polar-grid edges, with
    Gauss panels split at the profile kink circles."""
    rs = np.linspace(0.0, 1.0, n_r + 1)
    thetas = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    rg, tg = np.meshgrid(rs, thetas, indexing="ij")
    pts = np.stack([rg * np.cos(tg), rg * np.sin(tg)], axis=-1)
    tau = plug.tau(pts.reshape(-1, 2)).reshape(n_r + 1, n_theta)

    def residual(a_pts, b_pts, tau_a, tau_b):
        a_flat = a_pts.reshape(-1, 2)
        b_flat = b_pts.reshape(-1, 2)
        integral = line_integral_sigma(plug.map, a_flat, b_flat)
        integral = _fix_bead_edges(plug, a_flat, b_flat, integral)
        integral = _fix_kinked_edges(plug, a_flat, b_flat, integral)
        return np.abs(tau_b.reshape(-1) - tau_a.reshape(-1) - integral)

    rad = residual(pts[:-1], pts[1:], tau[:-1], tau[1:])
    b_ang = np.roll(pts, -1, axis=1)
    tau_bang = np.roll(tau, -1, axis=1)
    ang = residual(pts[1:], b_ang[1:], tau[1:], tau_bang[1:])
    return float(max(rad.max(), ang.max()))


def _fix_bead_edges(
    plug: Plug, a: np.ndarray, b: np.ndarray, integral: np.ndarray
) -> np.ndarray:
    """Densely re-integrate edges passing near a bead atom: an edge can span
    the whole bead ramp, which defeats a single Gauss panel."""
    delta = b - a
    lengths = np.hypot(delta[:, 0], delta[:, 1])
    beta_out = plug.spec.bead_ramp_outer * plug.spec.bead_radius
    flagged = np.zeros(len(a), dtype=bool)
    for c in plug.bead_centers:
        f = a - c
        dd = np.einsum("ij,ij->i", delta, delta)
        t_star = np.clip(-np.einsum("ij,ij->i", f, delta) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        nearest = f + t_star[:, None] * delta
        dist = np.hypot(nearest[:, 0], nearest[:, 1])
        flagged |= dist < beta_out + lengths
    if not flagged.any():
        return integral
    out = integral.copy()
    out[flagged] = line_integral_sigma_dense(plug.map, a[flagged], b[flagged])
    return out


def _fix_kinked_edges(
    plug: Plug, a: np.ndarray, b: np.ndarray, integral: np.ndarray
) -> np.ndarray:
    """Re-integrate edges that cross a global kink circle, splitting the
    Gauss panels at the crossings (bead-adjacent edges are handled by the
    dense pass)."""
    delta = b - a
    needs: dict[int, list[float]] = {}
    for (cx, cy), rho in plug.kink_circles[:2]:
        f = a - np.array([cx, cy])
        aa = np.einsum("ij,ij->i", delta, delta)
        bb = 2.0 * np.einsum("ij,ij->i", f, delta)
        cc = np.einsum("ij,ij->i", f, f) - rho * rho
        disc = bb * bb - 4.0 * aa * cc
        hit = (disc > 0) & (aa > 0)
        if not hit.any():
            continue
        sq = np.sqrt(disc[hit])
        idx = np.nonzero(hit)[0]
        for t in ((-bb[hit] - sq) / (2 * aa[hit]), (-bb[hit] + sq) / (2 * aa[hit])):
            inside = (t > 1e-12) & (t < 1.0 - 1e-12)
            for i, ti in zip(idx[inside], t[inside]):
                needs.setdefault(int(i), []).append(float(ti))
    if not needs:
        return integral
    out = integral.copy()
    for i, ts in needs.items():
        knots = np.array([0.0] + sorted(ts) + [1.0])
        total = 0.0
        for t0, t1 in zip(knots[:-1], knots[1:]):
            pa = a[i] + t0 * delta[i]
            pb = a[i] + t1 * delta[i]
            total += float(line_integral_sigma(plug.map, pa[None, :], pb[None, :])[0])
        out[i] = total
    return out


def verify_plug_contract(
    plug: Plug,
    det_grid: int = 200,
    fd_step: float = 1e-6,
    det_tol: float = 1e-8,
    residual_grid: tuple[int, int] = (256, 128),
    residual_tol: float = 1e-6,
    invariance_tol: float = 1e-8,
    action_tol: float = 1e-6,
    orbit_seed: int = 0,
    strict: bool = False,
) -> PlugContractReport:
    failures: list[str] = []

    # boundary: the map is the identity, bit-exact, outside outer_radius
    thetas = np.linspace(0.0, TWO_PI, 720, endpoint=False)
    radii = np.linspace(plug.outer_radius, 1.0, 9)
    ring = np.stack(
        [
            (radii[:, None] * np.cos(thetas)[None, :]).ravel(),
            (radii[:, None] * np.sin(thetas)[None, :]).ravel(),
        ],
        axis=-1,
    )
    boundary_error = float(np.max(np.abs(plug.phi(ring) - ring)))
    if boundary_error > 1e-13:
        failures.append("boundary")

    # determinant: finite-difference Jacobian on a uniform grid
    xs = np.linspace(-1.0, 1.0, det_grid)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([gx, gy], axis=-1).reshape(-1, 2)
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0]
    jac = fd_jacobian(plug.map, pts, h=fd_step)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    max_det_error = float(np.max(np.abs(det - 1.0)))
    if max_det_error > det_tol:
        failures.append("determinant")

    min_tau = plug.min_tau()
    if min_tau <= 0:
        failures.append("positivity")

    dtau_residual = _edge_residuals(plug, *residual_grid)
    if dtau_residual > residual_tol:
        failures.append("closedness")

    invariance_error = plug.invariance_error()
    if invariance_error > invariance_tol:
        failures.append("invariance")

    orbit_report = find_periodic_points(plug, seed=orbit_seed)
    identity_action = orbit_report.identity_action
    act = orbit_report.min_action
    if act < plug.spec.scale * plug.spec.boundary_value - action_tol:
        failures.append("action")
    centre_found = any(
        o.period == 1 and math.hypot(*o.points[0]) < 1e-6 for o in orbit_report.orbits
    )
    bead_found = any(o.period == plug.spec.n for o in orbit_report.orbits)
    if not (centre_found and bead_found):
        failures.append("family")

    volume = plug.volume()
    if not (volume > 0 and math.isfinite(volume)):
        failures.append("volume")

    census = verify_necklace_census(plug.necklace)
    expected = plug.necklace.expected_census()
    if census.counts != expected or census.euler_characteristic != 1:
        failures.append("census")

    report = PlugContractReport(
        boundary_error=boundary_error,
        max_det_error=max_det_error,
        min_tau=min_tau,
        dtau_residual=dtau_residual,
        invariance_error=invariance_error,
        min_action=act,
        identity_action=identity_action,
        volume=volume,
        census_counts=census.counts,
        expected_census=expected,
        orbit_report=orbit_report,
        passed=not failures,
        failures=failures,
    )
    if strict and failures:
        raise ContractViolation(
            f"plug contract failed: {', '.join(failures)}", item=failures[0]
        )
    return report
