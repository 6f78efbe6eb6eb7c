"""Insertion of the desk-scale plug into a rationalized tube.

Three cooperating layers:

* exact ledger arithmetic over ``Fraction`` that certifies a systolic-ratio
  lower bound from a tube atlas (minimal period, straight-piece parameters)
  and the planned insertion allowances (epsilon, delta);
* equal-area disc embeddings of the plug cross-section into the tube chart
  ``[-1, 1] x S^1`` with ``b * det(J psi) == 1``: an affine ellipse when the
  area fits inside one, otherwise a radial map onto a Fourier-smoothed
  rounded rectangle composed with an exact angular rearrangement (the radial
  star map has angle-only density, so the rearrangement kills it in closed
  form -- no iterative density correction is needed);
* the extension of the invariant Morse function from the embedded disc to
  the whole annulus chart.  A smooth periodic gauge supplies the collar
  profile; its unique interior critical point is a saddle at the far side
  of the chart ("the neck"), which is exactly the one extra index-1 point
  the annulus census requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import polyx as px
from .discmap import fd_jacobian
from .errors import (
    EpsilonTooLarge,
    GeometryInfeasible,
    InvalidGeometry,
    NoConvergence,
    PlugContractUnmet,
)
from .plug import (
    CriticalCensus,
    CriticalPoint,
    MorseNecklace,
    Plug,
    PlugContractReport,
    PlugSpec,
    build_plug,
    critical_census,
    necklace_census_seeds,
    verify_plug_contract,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Tube atlas and exact certification ledger
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StraightPieceSummary:
    """Standard-frame straight piece h = (a, -(b r + c)) on [-1, 1].

    Carries only the exact numbers the ledger needs: period a, slope b,
    offset c.  ``volume`` is the exact contact volume 2 a b of the piece.
    """

    a: Fraction
    b: Fraction
    c: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", px.as_fraction(self.a))
        object.__setattr__(self, "b", px.as_fraction(self.b))
        object.__setattr__(self, "c", px.as_fraction(self.c))
        if self.a <= 0 or self.b <= 0:
            raise InvalidGeometry("straight piece needs a > 0 and b > 0")

    @property
    def volume(self) -> Fraction:
        return 2 * self.a * self.b

    def insertion_budget(self, delta: Fraction) -> Fraction:
        """Contact-volume allowance for one plug insertion of thickness
        ``delta`` into this piece: the tube slab itself plus unit slack."""
        return (2 * self.a * self.b + 1) * px.as_fraction(delta)


@dataclass(frozen=True)
class TubeAtlas:
    """What the certification ledger knows about the ambient form.

    ``alpha_tmin`` is the certified minimal Reeb period of the rationalized
    form; ``pieces`` are the straight pieces receiving insertions.
    ``opaque`` is carried through to reports and figures untouched; it does
    not enter any arithmetic.
    """

    alpha_tmin: Fraction
    pieces: tuple[StraightPieceSummary, ...]
    opaque: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "alpha_tmin", px.as_fraction(self.alpha_tmin))
        object.__setattr__(self, "opaque", px.as_fraction(self.opaque))
        if self.alpha_tmin <= 0:
            raise InvalidGeometry("atlas minimal period must be positive")
        if not self.pieces:
            raise InvalidGeometry("atlas needs at least one straight piece")

    @property
    def budget_weight(self) -> Fraction:
        """Sum of (2 a b + 1) over the pieces: the delta-coefficient of the
        total insertion volume."""
        return sum((2 * p.a * p.b + 1 for p in self.pieces), Fraction(0))


@dataclass(frozen=True)
class CertifiedBound:
    """Exact output of the insertion ledger.

    ``ratio`` is a true lower bound for the systolic ratio of the modified
    form provided the insertion contracts hold: each inserted plug consumes
    at most its piece budget (2ab+1) delta of contact volume and shortens
    the minimal period by at most epsilon in total.
    """

    epsilon: Fraction
    delta: Fraction
    tmin_bound: Fraction
    volume_bound: Fraction
    ratio: Fraction
    target: Fraction | None
    meets_target: bool


def plan_parameters(atlas: TubeAtlas, target_ratio) -> tuple[Fraction, Fraction]:
    """Exact (epsilon, delta) guaranteeing a certified ratio >= target.

    epsilon = min(T/2, T^2 / (16 C)) keeps the period bound above T/2 and
    makes the volume allowance small against (T - epsilon)^2; delta splits
    half of epsilon across the pieces, so the total volume bound is exactly
    (3/2) epsilon and the certified ratio is at least
    (T/2)^2 / ((3/2) epsilon) >= (16 C / 6) / 4 * ... >= C with margin.
    """
    target = px.as_fraction(target_ratio)
    if target <= 0:
        raise InvalidGeometry("target ratio must be positive")
    t = atlas.alpha_tmin
    epsilon = min(t / 2, t * t / (16 * target))
    delta = epsilon / (2 * atlas.budget_weight)
    return epsilon, delta


def volume_bound(atlas: TubeAtlas, epsilon, delta) -> Fraction:
    """Exact upper bound for the contact volume after insertion: epsilon for
    everything outside the straight pieces plus each piece's budget."""
    epsilon = px.as_fraction(epsilon)
    delta = px.as_fraction(delta)
    if epsilon <= 0 or delta <= 0:
        raise InvalidGeometry("allowances must be positive")
    return epsilon + atlas.budget_weight * delta


def tmin_bound(atlas: TubeAtlas, epsilon) -> Fraction:
    """Exact lower bound for the minimal period after insertion."""
    epsilon = px.as_fraction(epsilon)
    remaining = atlas.alpha_tmin - epsilon
    if remaining <= 0:
        raise EpsilonTooLarge(
            f"epsilon {epsilon} consumes the whole minimal period {atlas.alpha_tmin}"
        )
    return remaining


def certify_insertion(
    atlas: TubeAtlas,
    target_ratio=None,
    epsilon=None,
    delta=None,
) -> CertifiedBound:
    """Run the exact ledger.  Either pass a target ratio (the planner picks
    epsilon and delta) or explicit allowances."""
    if epsilon is None or delta is None:
        if target_ratio is None:
            raise InvalidGeometry(
                "need either a target ratio or explicit epsilon and delta"
            )
        epsilon, delta = plan_parameters(atlas, target_ratio)
    epsilon = px.as_fraction(epsilon)
    delta = px.as_fraction(delta)
    period = tmin_bound(atlas, epsilon)
    volume = volume_bound(atlas, epsilon, delta)
    ratio = period * period / volume
    target = None if target_ratio is None else px.as_fraction(target_ratio)
    return CertifiedBound(
        epsilon=epsilon,
        delta=delta,
        tmin_bound=period,
        volume_bound=volume,
        ratio=ratio,
        target=target,
        meets_target=(target is not None and ratio >= target),
    )


# ---------------------------------------------------------------------------
# Equal-area disc embeddings into the tube chart [-1, 1] x S^1
# ---------------------------------------------------------------------------


def disc_radius_for(b: float, delta: float) -> float:
    """Radius of the standard disc whose area equals the covered contact
    area (1 - delta) * 2 b of the chart."""
    if not 0 < delta < 1:
        raise InvalidGeometry("area deficit delta must lie in (0, 1)")
    if b <= 0:
        raise InvalidGeometry("chart density b must be positive")
    return math.sqrt(2.0 * (1.0 - delta) * b / math.pi)


CHART_CENTER = (0.0, 0.5)


@dataclass(frozen=True)
class EllipseEmbedding:
    """Affine map of the standard disc onto an ellipse in the chart.

    With semi-axes chosen so the ellipse area equals 2 (1 - delta), the
    constant Jacobian satisfies b * det == 1 identically.
    """

    b: float
    delta: float
    disc_radius: float
    semi_axis_r: float
    semi_axis_x: float

    kind = "ellipse"
    center = CHART_CENTER

    def map(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = np.empty_like(pts)
        out[..., 0] = self.semi_axis_r * pts[..., 0] / self.disc_radius
        out[..., 1] = 0.5 + self.semi_axis_x * pts[..., 1] / self.disc_radius
        return out

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        jac = np.zeros(pts.shape[:-1] + (2, 2))
        jac[..., 0, 0] = self.semi_axis_r / self.disc_radius
        jac[..., 1, 1] = self.semi_axis_x / self.disc_radius
        return jac

    def density(self, pts: np.ndarray) -> np.ndarray:
        jac = self.jacobian(pts)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        return self.b * det

    def boundary(self, n: int = 512) -> np.ndarray:
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        circle = self.disc_radius * np.stack([np.cos(t), np.sin(t)], axis=-1)
        return self.map(circle)


class StarEmbedding:
    """Radial map onto a star-shaped domain with exact unit density.

    The domain boundary is a truncated Fourier cosine series R(theta)
    (a smoothed rounded rectangle scaled to the exact target area).  A
    plain radial map z -> center + (|z|/rho) R(theta) e(theta) has density
    b R(theta)^2 / rho^2, independent of |z|; composing with the angular
    rearrangement Theta(theta) solving M(Theta) = theta, where M is the
    normalized cumulative integral of R^2, makes b * det(J) == 1 exactly.
    The map is smooth away from the single center point.
    """

    kind = "star"
    center = CHART_CENTER

    def __init__(self, b: float, delta: float, harmonics: int = 24, margin: float | None = None):
        self.b = float(b)
        self.delta = float(delta)
        self.disc_radius = disc_radius_for(b, delta)
        target_area = 2.0 * (1.0 - delta)
        m = margin if margin is not None else max(delta / 6.0, 0.004)
        half_r, half_x = 1.0 - m, 0.5 - m
        corner = min(4.0 * m, 0.45 * half_x)
        raw_coeffs = _rounded_rect_fourier(half_r, half_x, corner, harmonics)
        raw_area = math.pi * raw_coeffs[0] ** 2 + 0.5 * math.pi * float(
            np.sum(raw_coeffs[1:] ** 2)
        )
        if raw_area < target_area:
            raise GeometryInfeasible(
                f"chart margins leave area {raw_area:.6f} < target {target_area:.6f}"
            )
        self.coeffs = raw_coeffs * math.sqrt(target_area / raw_area)
        # cumulative integral of R(Theta)^2 as a closed-form trig series
        self._sq_coeffs = _cosine_square_coeffs(self.coeffs)
        self._density_norm = self.b / self.disc_radius**2

    # -- boundary radius series --------------------------------------------

    def radius(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        k = np.arange(len(self.coeffs))
        return np.cos(2.0 * theta[..., None] * k) @ self.coeffs

    def radius_deriv(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        k = np.arange(len(self.coeffs))
        return -np.sin(2.0 * theta[..., None] * k) @ (2.0 * k * self.coeffs)

    def cumulative(self, theta: np.ndarray) -> np.ndarray:
        """M(theta) = (b / rho^2) * int_0^theta R^2; M(2 pi) == 2 pi."""
        theta = np.asarray(theta, dtype=float)
        c = self._sq_coeffs
        m = np.arange(1, len(c))
        base = c[0] * theta + np.sin(2.0 * np.multiply.outer(theta, m)) @ (
            c[1:] / (2.0 * m)
        )
        return self._density_norm * base

    def rearranged_angle(self, theta: np.ndarray) -> np.ndarray:
        """Theta with cumulative(Theta) == theta (vectorized Newton)."""
        theta = np.asarray(theta, dtype=float)
        wrapped = np.mod(theta, TWO_PI)
        guess = wrapped.copy()
        for _ in range(60):
            f = self.cumulative(guess) - wrapped
            df = self._density_norm * self.radius(guess) ** 2
            step = f / df
            guess = np.clip(guess - step, 0.0, TWO_PI)
            if np.max(np.abs(step)) < 1e-15:
                break
        if np.max(np.abs(self.cumulative(guess) - wrapped)) > 1e-11:
            raise NoConvergence("angular rearrangement Newton did not converge")
        return guess + (theta - wrapped)

    # -- the embedding ------------------------------------------------------

    def map(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        s = np.hypot(pts[..., 0], pts[..., 1]) / self.disc_radius
        theta = np.arctan2(pts[..., 1], pts[..., 0])
        big = self.rearranged_angle(theta)
        r_b = self.radius(big)
        out = np.empty_like(pts)
        out[..., 0] = s * r_b * np.cos(big)
        out[..., 1] = 0.5 + s * r_b * np.sin(big)
        return out

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        theta = np.arctan2(pts[..., 1], pts[..., 0])
        big = self.rearranged_angle(theta)
        r_b = self.radius(big)
        dr_b = self.radius_deriv(big)
        dbig = self.disc_radius**2 / (self.b * r_b**2)
        ct, st = np.cos(theta), np.sin(theta)
        cb, sb = np.cos(big), np.sin(big)
        rho = self.disc_radius
        # columns: d/d|z| along e(theta), d/d(theta)/|z| along e_perp(theta)
        col_s = np.stack([r_b * cb, r_b * sb], axis=-1) / rho
        col_t = (
            np.stack([dr_b * cb - r_b * sb, dr_b * sb + r_b * cb], axis=-1)
            * dbig[..., None]
            / rho
        )
        jac = np.empty(pts.shape[:-1] + (2, 2))
        jac[..., :, 0] = col_s * ct[..., None] - col_t * st[..., None]
        jac[..., :, 1] = col_s * st[..., None] + col_t * ct[..., None]
        return jac

    def density(self, pts: np.ndarray) -> np.ndarray:
        jac = self.jacobian(pts)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        return self.b * det

    def boundary(self, n: int = 512) -> np.ndarray:
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        r_b = self.radius(t)
        return np.stack([r_b * np.cos(t), 0.5 + r_b * np.sin(t)], axis=-1)


def _rounded_rect_radius(
    theta: np.ndarray, half_r: float, half_x: float, corner: float
) -> np.ndarray:
    """Radial gauge of a rounded rectangle centered at the origin."""
    c = np.abs(np.cos(theta))
    s = np.abs(np.sin(theta))
    ax, bx = half_r - corner, half_x - corner
    # distance to the vertical side, valid while the hit stays on the flat
    with np.errstate(divide="ignore"):
        t_side_r = np.where(c > 0, half_r / np.where(c > 0, c, 1.0), np.inf)
        t_side_x = np.where(s > 0, half_x / np.where(s > 0, s, 1.0), np.inf)
    hit_r_ok = t_side_r * s <= bx
    hit_x_ok = t_side_x * c <= ax
    # corner circle centered (ax, bx) radius ``corner``
    proj = c * ax + s * bx
    perp_sq = (c * bx - s * ax) ** 2
    t_corner = proj + np.sqrt(np.maximum(corner**2 - perp_sq, 0.0))
    out = np.where(hit_r_ok, t_side_r, np.where(hit_x_ok, t_side_x, t_corner))
    return out


def _rounded_rect_fourier(
    half_r: float, half_x: float, corner: float, harmonics: int, samples: int = 8192
) -> np.ndarray:
    """Cosine coefficients c_k of R(theta) ~ sum c_k cos(2 k theta)."""
    theta = (np.arange(samples) + 0.5) * (TWO_PI / samples)
    r = _rounded_rect_radius(theta, half_r, half_x, corner)
    k = np.arange(harmonics + 1)
    basis = np.cos(2.0 * np.outer(theta, k))
    coeffs = (r @ basis) / samples
    coeffs[0] *= 1.0
    coeffs[1:] *= 2.0
    return coeffs


def _cosine_square_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients C_m with R^2 = sum_m C_m cos(2 m theta)."""
    n = len(coeffs)
    out = np.zeros(2 * n - 1)
    for j in range(n):
        for k in range(n):
            prod = 0.5 * coeffs[j] * coeffs[k]
            out[abs(j - k)] += prod
            out[j + k] += prod
    return out


def build_equal_area_embedding(
    b: float,
    delta: float,
    kind: str = "auto",
    ellipse_halfheight: float = 0.35,
    star_harmonics: int = 24,
    star_margin: float | None = None,
):
    """Equal-area embedding of the standard disc into the chart.

    ``kind='auto'`` uses the affine ellipse while it fits (large delta) and
    the star map otherwise.
    """
    rho = disc_radius_for(b, delta)
    semi_r = 2.0 * (1.0 - delta) / (math.pi * ellipse_halfheight)
    if kind == "auto":
        kind = "ellipse" if semi_r <= 0.93 else "star"
    if kind == "ellipse":
        if not 0 < ellipse_halfheight < 0.5:
            raise InvalidGeometry("ellipse half-height must lie in (0, 0.5)")
        if semi_r >= 1.0:
            raise GeometryInfeasible(
                f"ellipse half-width {semi_r:.4f} does not fit the chart; "
                "use the star embedding for small delta"
            )
        return EllipseEmbedding(
            b=float(b),
            delta=float(delta),
            disc_radius=rho,
            semi_axis_r=semi_r,
            semi_axis_x=ellipse_halfheight,
        )
    if kind == "star":
        return StarEmbedding(b, delta, harmonics=star_harmonics, margin=star_margin)
    raise InvalidGeometry(f"unknown embedding kind {kind!r}")


@dataclass(frozen=True)
class EmbeddingReport:
    area_error: float
    max_density_error: float
    max_density_error_fd: float
    boundary_margin: float
    passed: bool


def verify_embedding(
    embedding,
    n_radial: int = 40,
    n_angular: int = 96,
    density_tol: float = 1e-6,
    area_rtol: float = 1e-15,
) -> EmbeddingReport:
    """Check the embedding contract.

    * exact area identity pi rho^2 == (1 - delta) 2 b;
    * unit density b det(J) == 1, from the analytic Jacobian and again from
      an independent finite-difference Jacobian;
    * the image stays strictly inside the open chart.

    The radial star map is not differentiable at the single center point,
    so density is sampled on radii bounded away from zero.
    """
    rho = embedding.disc_radius
    area = math.pi * rho * rho
    target = 2.0 * (1.0 - embedding.delta) * embedding.b
    area_error = abs(area - target) / max(1.0, abs(target))

    radii = np.linspace(0.02, 0.999, n_radial) * rho
    angles = np.linspace(0.0, TWO_PI, n_angular, endpoint=False)
    rg, ag = np.meshgrid(radii, angles, indexing="ij")
    pts = np.stack([rg * np.cos(ag), rg * np.sin(ag)], axis=-1).reshape(-1, 2)
    density = embedding.density(pts)
    max_density_error = float(np.max(np.abs(density - 1.0)))
    jac_fd = fd_jacobian(embedding.map, pts, h=1e-5 * rho)
    det_fd = jac_fd[:, 0, 0] * jac_fd[:, 1, 1] - jac_fd[:, 0, 1] * jac_fd[:, 1, 0]
    max_density_error_fd = float(np.max(np.abs(embedding.b * det_fd - 1.0)))

    edge = embedding.boundary(2048)
    margin_r = 1.0 - float(np.max(np.abs(edge[:, 0])))
    margin_x = 0.5 - float(np.max(np.abs(edge[:, 1] - 0.5)))
    boundary_margin = min(margin_r, margin_x)

    passed = (
        area_error <= area_rtol
        and max_density_error <= density_tol
        and max_density_error_fd <= density_tol
        and boundary_margin > 0.0
    )
    return EmbeddingReport(
        area_error=area_error,
        max_density_error=max_density_error,
        max_density_error_fd=max_density_error_fd,
        boundary_margin=boundary_margin,
        passed=passed,
    )


def pullback_primitive(embedding, b: float, c: float = 0.0):
    """psi^* (h2 dx2) with h2 = -(b r + c), as a covector field on the disc.

    Its exterior derivative is -(b det J) dz1 ^ dz2 == -1 (unit density), so
    it is the standard primitive the plug's generating function works with.
    """

    def form(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        img = embedding.map(pts)
        jac = embedding.jacobian(pts)
        height = -(b * img[..., 0] + c)
        return height[..., None] * jac[..., 1, :]

    return form


# ---------------------------------------------------------------------------
# Annulus extension of the invariant Morse function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusMorseSpec:
    """Geometry of the collar extension.

    The smooth periodic gauge G^2 = (r / gauge_halfwidth)^2 +
    (sin(pi (x2 - 1/2)) / (pi gauge_halfheight))^2 has exactly one critical
    point outside the disc region: a saddle at the neck (0, 0).  The disc
    sits inside the seam level set {G = seam_level}, which must stay
    strictly below the saddle value 1 / (pi gauge_halfheight) so the seam
    loop closes around the disc.
    """

    gauge_halfwidth: float = 0.75
    gauge_halfheight: float = 0.40
    seam_level: float = 0.55
    growth: float = 1.0


class AnnulusMorse:
    """Invariant Morse function extended over the chart annulus.

    Inside the seam oval the necklace function is pulled back through an
    explicit closed-form diffeomorphism onto the unit disc; outside, the
    value grows monotonically with the gauge, C^1-matched across the seam.
    The census over the annulus is the disc census plus exactly one saddle.
    """

    def __init__(self, necklace: MorseNecklace, spec: AnnulusMorseSpec):
        a_r, a_x = spec.gauge_halfwidth, spec.gauge_halfheight
        if not (0 < a_r < 1 and 0 < a_x < 0.5):
            raise InvalidGeometry("gauge semi-axes must fit inside the chart")
        saddle = 1.0 / (math.pi * a_x)
        if saddle >= 1.0:
            raise InvalidGeometry(
                "gauge half-height too small: the neck saddle must sit below "
                "the chart edge (needs gauge_halfheight > 1/pi)"
            )
        if not 0 < spec.seam_level < saddle:
            raise InvalidGeometry(
                f"seam level {spec.seam_level} must lie strictly below the "
                f"neck saddle level {saddle:.4f}"
            )
        if spec.growth < 0:
            raise InvalidGeometry("collar growth must be nonnegative")
        self.necklace = necklace
        self.spec = spec
        self.saddle_level = saddle
        self.neck = (0.0, 0.0)
        r_b = necklace.ring_radius
        amp = necklace.amplitude
        self.seam_value = amp * (1.0 - r_b**2) ** 2
        self.seam_slope = 4.0 * amp * (1.0 - r_b**2)
        # linear collar coefficient that makes the seam C^1
        self._phi_lin = self.seam_slope / (2.0 * spec.seam_level**2)

    # -- gauge ---------------------------------------------------------------

    @staticmethod
    def _canonical(pts: np.ndarray) -> np.ndarray:
        """x2 lives on R/Z; fold it into [0, 1) so every formula sees the
        fundamental domain (the seam oval sits around x2 = 1/2)."""
        pts = np.array(pts, dtype=float)
        pts[..., 1] = np.mod(pts[..., 1], 1.0)
        return pts

    def gauge_sq(self, pts: np.ndarray) -> np.ndarray:
        pts = self._canonical(pts)
        a_r, a_x = self.spec.gauge_halfwidth, self.spec.gauge_halfheight
        sin_part = np.sin(math.pi * (pts[..., 1] - 0.5)) / (math.pi * a_x)
        return (pts[..., 0] / a_r) ** 2 + sin_part**2

    def gauge_sq_gradient(self, pts: np.ndarray) -> np.ndarray:
        pts = self._canonical(pts)
        a_r, a_x = self.spec.gauge_halfwidth, self.spec.gauge_halfheight
        out = np.empty_like(pts)
        out[..., 0] = 2.0 * pts[..., 0] / a_r**2
        out[..., 1] = np.sin(TWO_PI * (pts[..., 1] - 0.5)) / (math.pi * a_x**2)
        return out

    def disc_coords(self, pts: np.ndarray) -> np.ndarray:
        """Closed-form diffeomorphism from the seam oval onto the unit disc."""
        pts = self._canonical(pts)
        a_r, a_x = self.spec.gauge_halfwidth, self.spec.gauge_halfheight
        c = self.spec.seam_level
        out = np.empty_like(pts)
        out[..., 0] = pts[..., 0] / (a_r * c)
        out[..., 1] = np.sin(math.pi * (pts[..., 1] - 0.5)) / (math.pi * a_x * c)
        return out

    def chart_coords(self, disc_pts: np.ndarray) -> np.ndarray:
        """Inverse of ``disc_coords`` (unit disc -> seam oval)."""
        disc_pts = np.asarray(disc_pts, dtype=float)
        a_r, a_x = self.spec.gauge_halfwidth, self.spec.gauge_halfheight
        c = self.spec.seam_level
        out = np.empty_like(disc_pts)
        out[..., 0] = disc_pts[..., 0] * a_r * c
        arg = np.clip(math.pi * a_x * c * disc_pts[..., 1], -1.0, 1.0)
        out[..., 1] = 0.5 + np.arcsin(arg) / math.pi
        return out

    # -- the function ---------------------------------------------------------

    def _phi(self, t: np.ndarray) -> np.ndarray:
        return self._phi_lin * t + self.spec.growth * t * t

    def _dphi(self, t: np.ndarray) -> np.ndarray:
        return self._phi_lin + 2.0 * self.spec.growth * t

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = self._canonical(pts)
        g2 = self.gauge_sq(pts)
        c2 = self.spec.seam_level**2
        inside = self.necklace(self.disc_coords(pts))
        outside = self.seam_value + self._phi(g2 - c2)
        return np.where(g2 <= c2, inside, outside)

    def gradient(self, pts: np.ndarray) -> np.ndarray:
        pts = self._canonical(pts)
        g2 = self.gauge_sq(pts)
        c2 = self.spec.seam_level**2
        a_r, a_x = self.spec.gauge_halfwidth, self.spec.gauge_halfheight
        c = self.spec.seam_level
        disc = self.disc_coords(pts)
        g_in = self.necklace.gradient(disc)
        grad_in = np.empty_like(pts)
        grad_in[..., 0] = g_in[..., 0] / (a_r * c)
        grad_in[..., 1] = (
            g_in[..., 1] * np.cos(math.pi * (pts[..., 1] - 0.5)) / (a_x * c)
        )
        grad_out = self._dphi(g2 - c2)[..., None] * self.gauge_sq_gradient(pts)
        return np.where((g2 <= c2)[..., None], grad_in, grad_out)

    def outward_radial_derivative(self, pts: np.ndarray) -> np.ndarray:
        """sign(r) * dF/dr: strictly positive throughout the collar, which
        is the monotone-toward-both-faces profile the insertion needs."""
        pts = np.asarray(pts, dtype=float)
        grad = self.gradient(pts)
        return np.sign(pts[..., 0]) * grad[..., 0]

    def expected_census(self) -> tuple[int, int, int]:
        m = self.necklace.site_count
        return (m, m + 1, 1)

    def seam_curve(self, n: int = 512) -> np.ndarray:
        t = np.linspace(0.0, TWO_PI, n)
        circle = np.stack([np.cos(t), np.sin(t)], axis=-1)
        return self.chart_coords(circle)


def extend_annulus_morse(
    necklace: MorseNecklace, spec: AnnulusMorseSpec | None = None
) -> AnnulusMorse:
    return AnnulusMorse(necklace, spec or AnnulusMorseSpec())


def annulus_census_seeds(annulus: AnnulusMorse) -> np.ndarray:
    disc_seeds = necklace_census_seeds(annulus.necklace)
    mapped = annulus.chart_coords(disc_seeds)
    rs = np.linspace(-0.97, 0.97, 41)
    xs = np.linspace(0.0, 1.0, 37, endpoint=False)
    rg, xg = np.meshgrid(rs, xs, indexing="ij")
    grid = np.stack([rg, xg], axis=-1).reshape(-1, 2)
    neck = np.array([[0.0, 0.0], [0.0, 1e-3], [1e-3, 0.0]])
    return np.concatenate([mapped, grid, neck])


def _wrap_points(points: list[CriticalPoint], tol: float) -> list[CriticalPoint]:
    """Canonicalize x2 into [0, 1) and merge periodic duplicates."""
    kept: list[CriticalPoint] = []
    for pt in points:
        loc = (pt.location[0], pt.location[1] % 1.0)
        wrapped = CriticalPoint(
            location=loc, value=pt.value, index=pt.index, hessian_eigs=pt.hessian_eigs
        )
        duplicate = False
        for other in kept:
            dr = abs(loc[0] - other.location[0])
            dx = abs(loc[1] - other.location[1])
            if dr < tol and min(dx, 1.0 - dx) < tol:
                duplicate = True
                break
        if not duplicate:
            kept.append(wrapped)
    return kept


def verify_annulus_census(
    annulus: AnnulusMorse, edge_margin: float = 0.01
) -> CriticalCensus:
    """Newton census of the extended function over the open annulus.

    The chart coordinate x2 is periodic; Newton runs in the covering space
    and the results are wrapped back, merging copies of the same critical
    point found across the seam x2 = 0.
    """
    seeds = annulus_census_seeds(annulus)

    def mask(pts):
        return np.abs(np.asarray(pts)[:, 0]) < 1.0 - edge_margin

    raw = critical_census(annulus, annulus.gradient, seeds, mask, dedupe_tol=1e-5)
    return CriticalCensus(
        minima=_wrap_points(raw.minima, 1e-5),
        saddles=_wrap_points(raw.saddles, 1e-5),
        maxima=_wrap_points(raw.maxima, 1e-5),
    )


def collar_sample(
    annulus: AnnulusMorse, n_points: int = 1000, seed: int = 0
) -> np.ndarray:
    """Deterministic sample of the collar (outside the seam oval, away from
    the radial axis r = 0 where "outward" is undefined)."""
    rng = np.random.default_rng(seed)
    c2 = (1.02 * annulus.spec.seam_level) ** 2
    chunks: list[np.ndarray] = []
    total = 0
    while total < n_points:
        r = rng.uniform(-0.999, 0.999, 4 * n_points)
        x2 = rng.uniform(0.0, 1.0, 4 * n_points)
        pts = np.stack([r, x2], axis=-1)
        keep = (annulus.gauge_sq(pts) > c2) & (np.abs(r) > 0.02)
        got = pts[keep]
        chunks.append(got)
        total += len(got)
    return np.concatenate(chunks)[:n_points]


def check_outward_monotonicity(
    annulus: AnnulusMorse, n_points: int = 1000, seed: int = 0
) -> float:
    """Minimum outward radial derivative over deterministic collar samples
    (both faces).  Positive means no critical circle hides in the collar."""
    pts = collar_sample(annulus, n_points, seed)
    return float(np.min(annulus.outward_radial_derivative(pts)))


# ---------------------------------------------------------------------------
# Demo insertion: one plug, physically embedded and fully certified
# ---------------------------------------------------------------------------


@dataclass
class BudgetCheck:
    piece_index: int
    budget: float
    demo_volume: float
    satisfied: bool


@dataclass
class InsertionDemo:
    atlas: TubeAtlas
    bound: CertifiedBound
    demo_delta: float
    embedding: object
    embedding_report: EmbeddingReport
    plug: Plug
    contract: PlugContractReport | None
    annulus: AnnulusMorse
    annulus_census: CriticalCensus
    annulus_census_ok: bool
    outward_min_slope: float
    budget: BudgetCheck


def insert_plug(
    atlas: TubeAtlas,
    target_ratio=None,
    epsilon=None,
    delta=None,
    demo_delta: float = 0.5,
    plug_spec: PlugSpec | None = None,
    run_contract: bool = True,
    strict_plug: bool = False,
) -> InsertionDemo:
    """Certify the bound at ledger level and build the demo-scale insertion.

    The exact ledger uses the planner allowances; the demo geometry uses
    ``demo_delta`` (a deliberately generous deficit, so one embedding, one
    plug and one Morse extension exercise every analytic contract at a
    numerically comfortable scale).  The ledger's per-piece volume budget is
    compared against the demo plug's measured volume: that comparison is
    the recorded contract assumption linking the two scales.
    """
    bound = certify_insertion(atlas, target_ratio, epsilon, delta)
    piece = atlas.pieces[0]
    embedding = build_equal_area_embedding(float(piece.b), demo_delta)
    embedding_report = verify_embedding(embedding)
    if strict_plug and not embedding_report.passed:
        raise PlugContractUnmet("equal-area embedding failed its contract")

    spec = plug_spec or PlugSpec(n=4)
    plug = build_plug(replace(spec, scale=embedding.disc_radius))
    contract = None
    if run_contract:
        contract = verify_plug_contract(plug)
        if strict_plug and not contract.passed:
            raise PlugContractUnmet(
                "demo plug failed its contract: " + ", ".join(contract.failures)
            )

    annulus = extend_annulus_morse(plug.necklace)
    census = verify_annulus_census(annulus)
    census_ok = (
        census.counts == annulus.expected_census()
        and census.euler_characteristic == 0
    )
    slope = check_outward_monotonicity(annulus)
    if strict_plug and (not census_ok or slope <= 0):
        raise PlugContractUnmet("annulus extension failed its census contract")

    demo_volume = plug.volume()
    budget_value = float(piece.insertion_budget(px.as_fraction(demo_delta)))
    budget = BudgetCheck(
        piece_index=0,
        budget=budget_value,
        demo_volume=demo_volume,
        satisfied=demo_volume <= budget_value * (1.0 + 1e-12),
    )
    if strict_plug and not budget.satisfied:
        raise PlugContractUnmet(
            f"demo plug volume {demo_volume:.6f} exceeds its insertion "
            f"budget {budget_value:.6f}"
        )
    return InsertionDemo(
        atlas=atlas,
        bound=bound,
        demo_delta=demo_delta,
        embedding=embedding,
        embedding_report=embedding_report,
        plug=plug,
        contract=contract,
        annulus=annulus,
        annulus_census=census,
        annulus_census_ok=census_ok,
        outward_min_slope=slope,
        budget=budget,
    )
