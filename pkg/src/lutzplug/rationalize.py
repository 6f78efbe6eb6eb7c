"""Piecewise-linear rationalization of profile curves, with certification.

Pipeline: pick vertex radii so each span is angularly flat, snap chord slopes
to simplest rationals, rebuild vertices exactly on the snapped rays, blend
corners with parabolic fillets under an exact volume budget, and certify the
result against the input curve (volume, per-slope period factors, contact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import curves as cv
from . import polyx as px
from .errors import (
    BudgetExceeded,
    CertificationFailed,
    DegeneratePosition,
    InvalidGeometry,
    NoRoot,
    TooManyVertices,
)


# ---------------------------------------------------------------------------
# budgets and result types


@dataclass(frozen=True)
class ApproxBudget:
    """Error budget for a rationalization run, split equally across the four
    stages (vertex selection, slope snapping, homotopy margin, corner
    smoothing)."""

    total: Fraction

    def __post_init__(self):
        object.__setattr__(self, "total", px.as_fraction(self.total))
        if self.total <= 0:
            raise InvalidGeometry("budget must be positive")

    @property
    def quarter(self) -> Fraction:
        return self.total / 4


@dataclass(frozen=True)
class SegmentFactor:
    """Period-density comparison of one rationalized segment with the input
    curve at a slope-matched radius."""

    segment: int
    slope: cv.RationalSlope | None
    anchor: float | None
    factor: float
    is_fillet: bool


@dataclass(frozen=True)
class CertificationReport:
    contact_original: bool
    contact_rationalized: bool
    volume_original: float
    volume_rationalized: float
    volume_difference: float
    min_period_factor: float
    max_period_factor: float
    factors: tuple[SegmentFactor, ...]
    anchor_misses: int
    epsilon: float
    passed: bool

    def require(self) -> None:
        if not self.passed:
            raise CertificationFailed(
                f"rationalization certificate failed: "
                f"|dV|={self.volume_difference:.3g}, "
                f"factor range [{self.min_period_factor:.6g}, "
                f"{self.max_period_factor:.6g}], eps={self.epsilon:.3g}",
                report=self,
            )


@dataclass(frozen=True)
class RationalizationResult:
    curve: cv.ProfileCurve            # smoothed output
    pl_curve: cv.ProfileCurve         # pre-smoothing piecewise-linear curve
    vertices: tuple[Fraction, ...]    # adjusted vertex radii
    slopes: tuple[cv.RationalSlope, ...]
    report: CertificationReport
    epsilon: float
    iterations: int


@dataclass(frozen=True)
class NormalizedPiece:
    """A straight piece brought to the standard frame h = (a, -(b r + c)) on
    [-1, 1] by a determinant-one integer torus map plus an affine radius map."""

    a: Fraction
    b: Fraction
    c: Fraction
    matrix: tuple[tuple[int, int], tuple[int, int]]
    curve: cv.ProfileCurve
    original_domain: tuple[Fraction, Fraction]


# ---------------------------------------------------------------------------
# slope snapping (Stern-Brocot simplest fraction in an open interval)


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The unique simplest fraction in the open interval (lo, hi)."""
    if not lo < hi:
        raise InvalidGeometry("empty snapping interval")
    if lo < 0 < hi:
        return Fraction(0)
    if hi <= 0:
        return -_simplest_between(-hi, -lo)
    if lo == 0:
        # smallest denominator wins: largest unit fraction below hi
        n = (Fraction(1) / hi).numerator // (Fraction(1) / hi).denominator + 1
        return Fraction(1, n)
    a = lo.numerator // lo.denominator
    if a + 1 < hi:
        return Fraction(a + 1)
    lo_f, hi_f = lo - a, hi - a
    if lo_f == 0:
        n = (Fraction(1) / hi_f).numerator // (Fraction(1) / hi_f).denominator + 1
        return a + Fraction(1, n)
    return a + 1 / _simplest_between(1 / hi_f, 1 / lo_f)


def snap_slope(target, tolerance) -> cv.RationalSlope:
    """Simplest rational slope within ``tolerance`` of ``target``.

    Steep targets snap projectively: when 1/|target| < tolerance the vertical
    direction is considered the simplest admissible slope.
    """
    tol = px.as_fraction(tolerance)
    if tol <= 0:
        raise InvalidGeometry("snap tolerance must be positive")
    if isinstance(target, cv.RationalSlope):
        return target
    if isinstance(target, cv.IrrationalSlope):
        target = target.approx
    if isinstance(target, float) and math.isinf(target):
        return cv.RationalSlope(1, 0)
    t = px.as_fraction(target)
    if t != 0 and 1 / abs(t) < tol:
        return cv.RationalSlope(1, 0)
    s = _simplest_between(t - tol, t + tol)
    return cv.RationalSlope(s.numerator, s.denominator)


# ---------------------------------------------------------------------------
# vertex selection


def _span_deviation(curve: cv.ProfileCurve, a: float, b: float, samples: int = 33) -> float:
    """Max angle between span tangents and the span chord, in radians."""
    pa, pb = curve.h(a), curve.h(b)
    chord = (pb[0] - pa[0], pb[1] - pa[1])
    if chord == (0.0, 0.0):
        return math.pi
    data = curve.sample(np.linspace(a, b, samples))
    cross = chord[0] * data["dh2"] - chord[1] * data["dh1"]
    dot = chord[0] * data["dh1"] + chord[1] * data["dh2"]
    return float(np.max(np.abs(np.arctan2(cross, dot))))


def select_vertices(
    curve: cv.ProfileCurve,
    c1_tolerance: float,
    max_vertices: int = 512,
) -> list[Fraction]:
    """Vertex radii (incl. endpoints) with span tangent-chord deviation below
    ``c1_tolerance``, chosen by adaptive midpoint bisection."""
    if c1_tolerance <= 0:
        raise InvalidGeometry("tolerance must be positive")
    lo, hi = curve.domain
    spans = [(lo, hi)]
    accepted: list[tuple[Fraction, Fraction]] = []
    while spans:
        a, b = spans.pop()
        if _span_deviation(curve, float(a), float(b)) < c1_tolerance:
            accepted.append((a, b))
            continue
        if len(accepted) + len(spans) + 2 > max_vertices:
            raise TooManyVertices(
                f"more than {max_vertices} vertices needed at tolerance "
                f"{c1_tolerance:.3g}"
            )
        if float(b - a) < 1e-6:
            raise TooManyVertices(
                f"span at r={float(a):.6g} cannot be flattened below "
                f"{c1_tolerance:.3g}"
            )
        mid = (a + b) / 2
        spans.append((mid, b))
        spans.append((a, mid))
    accepted.sort()
    verts = [accepted[0][0]] + [s[1] for s in accepted]
    return verts


# ---------------------------------------------------------------------------
# anchors


def mean_value_anchor(
    curve: cv.ProfileCurve, a, b, slope: cv.RationalSlope, tol=Fraction(1, 10**12)
) -> Fraction:
    """A radius in [a, b] where the curve direction is parallel to ``slope``.

    Roots of p*h2' + q*h1' are isolated exactly to width ``tol``; the root
    closest to the span midpoint is returned.  A segment whose direction is
    identically parallel contributes the midpoint of its overlap.
    """
    a, b = px.as_fraction(a), px.as_fraction(b)
    if not a < b:
        raise InvalidGeometry("empty anchor span")
    tol = px.as_fraction(tol)
    mid = (a + b) / 2
    candidates: list[Fraction] = []
    for i in range(curve.num_segments):
        sa = max(a, curve.breakpoints[i])
        sb = min(b, curve.breakpoints[i + 1])
        if not sa < sb:
            continue
        d1 = px.pderiv(curve.h1_polys[i])
        d2 = px.pderiv(curve.h2_polys[i])
        g = px.padd(px.pscale(d2, slope.p), px.pscale(d1, slope.q))
        if px.is_zero(g):
            candidates.append((sa + sb) / 2)
            continue
        if px.degree(g) == 0:
            continue
        for lo_r, hi_r in px.isolate_roots(g, sa, sb, tol):
            candidates.append((lo_r + hi_r) / 2)
    if not candidates:
        raise NoRoot(
            f"no radius in [{float(a):.6g}, {float(b):.6g}] has slope {slope}"
        )
    return min(candidates, key=lambda r: (abs(r - mid), r))


def _float_direction_anchor(
    curve: cv.ProfileCurve, direction: tuple[float, float], hint: float
) -> float | None:
    """Radius where the curve direction is parallel to a float direction,
    found by a dense scan plus bisection; closest sign change to ``hint``."""
    dq, dp = direction

    def gval(x: float) -> float:
        i = curve.segment_index(x)
        return (dp * px.peval_float(px.pderiv(curve.h2_polys[i]), x)
                + dq * px.peval_float(px.pderiv(curve.h1_polys[i]), x))

    lo, hi = float(curve.domain[0]), float(curve.domain[1])
    rs = np.linspace(lo, hi, 2048)
    data = curve.sample(rs)
    g = dp * data["dh2"] + dq * data["dh1"]
    sign = np.sign(g)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    exact = np.nonzero(sign == 0)[0]
    cands: list[float] = [float(rs[j]) for j in exact]
    for j in flips:
        x0, x1 = float(rs[j]), float(rs[j + 1])
        for _ in range(60):
            xm = 0.5 * (x0 + x1)
            gm = gval(xm)
            if gm == 0:
                x0 = x1 = xm
                break
            if (gm > 0) == (g[j] > 0):
                x0 = xm
            else:
                x1 = xm
        cands.append(0.5 * (x0 + x1))
    if not cands:
        return None
    return min(cands, key=lambda r: abs(r - hint))


# ---------------------------------------------------------------------------
# piecewise-linear construction


@dataclass(frozen=True)
class PLVertex:
    radius: Fraction
    point: tuple[Fraction, Fraction]
    on_curve: bool  # False when the ray/curve intersection fell back


def _snap_chord(p0, p1, tol) -> cv.RationalSlope:
    ch1, ch2 = p1[0] - p0[0], p1[1] - p0[1]
    if ch1 == 0 and ch2 == 0:
        raise DegeneratePosition("zero chord")
    target = math.inf if ch1 == 0 else float(ch2) / float(ch1)
    return snap_slope(target, tol)


def build_pl_curve(
    curve: cv.ProfileCurve,
    vertices: list[Fraction],
    slope_tolerance,
) -> tuple[cv.ProfileCurve, list[PLVertex], list[cv.RationalSlope]]:
    """Piecewise-linear curve with exactly rational segment slopes.

    Chord slopes of consecutive vertices are snapped to simplest rationals;
    each interior vertex is the exact projection onto the snapped ray of the
    point where that ray crosses the input curve, so segment directions are
    exact integer vectors while those vertices stay within ~1e-12 of the
    curve.  Both curve endpoints are kept exactly: the final vertex is the
    curve's endpoint and the second-to-last vertex is the exact intersection
    of its two neighbouring rational rays (it may sit slightly off the curve,
    which is the price of closing up with exact slopes).
    """
    if len(vertices) < 2:
        raise InvalidGeometry("need at least two vertices")
    verts = [px.as_fraction(v) for v in vertices]
    tol = px.as_fraction(slope_tolerance)
    start = curve.h_exact(verts[0])
    end = curve.h_exact(verts[-1])
    w_points: list[tuple[Fraction, Fraction]] = [start]
    radii: list[Fraction] = [verts[0]]
    slopes: list[cv.RationalSlope] = []
    on_curve_flags: list[bool] = [True]
    n = len(verts) - 1

    if n == 1:
        # single span: the exact chord is already rational (endpoints are)
        ch1, ch2 = end[0] - start[0], end[1] - start[1]
        if ch1 == 0 and ch2 == 0:
            raise DegeneratePosition("zero chord on the only span")
        gch = px.gcd_fraction(ch1, ch2)
        slopes.append(cv.RationalSlope(int(ch2 / gch), int(ch1 / gch)))
        w_points.append(end)
        radii.append(verts[-1])
        on_curve_flags.append(True)
    else:
        for k in range(n - 2):
            v0, v1 = verts[k], verts[k + 1]
            p0 = w_points[-1]
            slope = _snap_chord(p0, curve.h_exact(v1), tol)
            dq, dp = slope.direction
            r_star = _ray_crossing(curve, p0, (dq, dp), v0, v1)
            hit = curve.h_exact(r_star)
            num = (hit[0] - p0[0]) * dq + (hit[1] - p0[1]) * dp
            t = px.as_fraction(float(num / (dq * dq + dp * dp)))
            w_next = (p0[0] + t * dq, p0[1] + t * dp)
            if r_star <= radii[-1]:
                raise InvalidGeometry(f"non-increasing vertex radius on span {k}")
            w_points.append(w_next)
            radii.append(r_star)
            slopes.append(slope)
            on_curve_flags.append(True)

        # close up the final two spans with exact slopes and an exact endpoint
        p0 = w_points[-1]
        mid_target = curve.h_exact(verts[-2])
        s_in = _snap_chord(p0, mid_target, tol)
        s_out = _snap_chord(mid_target, end, tol / 8)
        u, v = s_in.direction, s_out.direction
        det = u[0] * v[1] - u[1] * v[0]
        if det != 0:
            # p0 + t u == end - s v
            rx, ry = end[0] - p0[0], end[1] - p0[1]
            t = (rx * v[1] - ry * v[0]) / det
            w_mid = (p0[0] + t * u[0], p0[1] + t * u[1])
            mid_on_curve = False
        else:
            # parallel rays: keep the projected mid vertex; the endpoint then
            # moves by the residual perpendicular miss
            num = ((mid_target[0] - p0[0]) * u[0] + (mid_target[1] - p0[1]) * u[1])
            t = px.as_fraction(float(num / (u[0] ** 2 + u[1] ** 2)))
            w_mid = (p0[0] + t * u[0], p0[1] + t * u[1])
            num2 = ((end[0] - w_mid[0]) * v[0] + (end[1] - w_mid[1]) * v[1])
            t2 = num2 / (v[0] ** 2 + v[1] ** 2)
            end = (w_mid[0] + t2 * v[0], w_mid[1] + t2 * v[1])
            mid_on_curve = True
        if not radii[-1] < verts[-2] < verts[-1]:
            raise InvalidGeometry("vertex radii collapsed while closing up")
        w_points.extend([w_mid, end])
        radii.extend([verts[-2], verts[-1]])
        slopes.extend([s_in, s_out])
        on_curve_flags.extend([mid_on_curve, True])

    h1s, h2s = [], []
    for k in range(len(radii) - 1):
        r0, r1 = radii[k], radii[k + 1]
        a0, a1 = w_points[k], w_points[k + 1]
        inv = 1 / (r1 - r0)
        h1s.append(px.poly([a0[0] - r0 * (a1[0] - a0[0]) * inv, (a1[0] - a0[0]) * inv]))
        h2s.append(px.poly([a0[1] - r0 * (a1[1] - a0[1]) * inv, (a1[1] - a0[1]) * inv]))
    pl = cv.ProfileCurve(tuple(radii), tuple(h1s), tuple(h2s),
                         (True,) * len(h1s))
    infos = [PLVertex(r, w, f) for r, w, f in zip(radii, w_points, on_curve_flags)]
    return pl, infos, slopes


def _ray_crossing(
    curve: cv.ProfileCurve,
    p0: tuple[Fraction, Fraction],
    direction: tuple[int, int],
    v0: Fraction,
    v1: Fraction,
) -> Fraction:
    """Radius nearest v1 where the ray p0 + t*direction crosses the curve.

    Searches the window around [v0, v1]; falls back to v1 when the snapped
    ray misses the curve inside the window.
    """
    dq, dp = direction
    pad = (v1 - v0) / 2
    lo = max(curve.domain[0], v0 + (v1 - v0) / 4)
    hi = min(curve.domain[1], v1 + pad)
    best: Fraction | None = None
    for i in range(curve.num_segments):
        sa, sb = max(lo, curve.breakpoints[i]), min(hi, curve.breakpoints[i + 1])
        if not sa < sb:
            continue
        # cross(direction, h(r) - p0) == 0
        g = px.psub(
            px.pscale(px.psub(curve.h2_polys[i], (p0[1],)), dq),
            px.pscale(px.psub(curve.h1_polys[i], (p0[0],)), dp),
        )
        if px.is_zero(g) or px.degree(g) == 0:
            continue
        for lo_r, hi_r in px.isolate_roots(g, sa, sb, Fraction(1, 2**48)):
            root = px.as_fraction(float((lo_r + hi_r) / 2))
            if best is None or abs(root - v1) < abs(best - v1):
                best = root
    return best if best is not None else v1


# ---------------------------------------------------------------------------
# homotopy and corner smoothing


def convex_homotopy(c0: cv.ProfileCurve, c1: cv.ProfileCurve, t) -> cv.ProfileCurve:
    """Pointwise blend (1-t) c0 + t c1 on the merged breakpoint partition."""
    t = px.as_fraction(t)
    if not 0 <= t <= 1:
        raise InvalidGeometry("homotopy parameter must lie in [0, 1]")
    if c0.domain != c1.domain:
        raise InvalidGeometry("homotopy endpoints have different domains")
    merged: list[Fraction] = []
    for b in sorted(set(c0.breakpoints) | set(c1.breakpoints)):
        if merged and float(b - merged[-1]) < 1e-12:
            continue
        merged.append(b)
    if merged[-1] != c0.breakpoints[-1]:
        merged[-1] = c0.breakpoints[-1]
    h1s, h2s, flags = [], [], []
    s = 1 - t
    for j in range(len(merged) - 1):
        mid = (merged[j] + merged[j + 1]) / 2
        i0, i1 = c0.segment_index(mid), c1.segment_index(mid)
        h1s.append(px.padd(px.pscale(c0.h1_polys[i0], s), px.pscale(c1.h1_polys[i1], t)))
        h2s.append(px.padd(px.pscale(c0.h2_polys[i0], s), px.pscale(c1.h2_polys[i1], t)))
        flags.append(c0.exact[i0] and c1.exact[i1])
    return cv.ProfileCurve(tuple(merged), tuple(h1s), tuple(h2s), tuple(flags))


def smooth_corners(
    pl: cv.ProfileCurve,
    volume_budget,
    max_window_fraction=Fraction(1, 4),
) -> cv.ProfileCurve:
    """Replace velocity jumps by parabolic fillets, keeping joins exactly C1.

    Each fillet interpolates the two segment velocities linearly across a
    window centred on the corner; the window is halved until the exact volume
    change is below the per-corner budget and the fillet keeps the wronskian
    strictly negative.
    """
    budget = px.as_fraction(volume_budget)
    if budget <= 0:
        raise InvalidGeometry("volume budget must be positive")
    for p in pl.h1_polys + pl.h2_polys:
        if px.degree(p) > 1:
            raise InvalidGeometry("corner smoothing expects straight segments")
    corners = []
    for i in range(1, pl.num_segments):
        r = pl.breakpoints[i]
        dl = (px.peval(px.pderiv(pl.h1_polys[i - 1]), r),
              px.peval(px.pderiv(pl.h2_polys[i - 1]), r))
        dr = (px.peval(px.pderiv(pl.h1_polys[i]), r),
              px.peval(px.pderiv(pl.h2_polys[i]), r))
        if dl != dr:
            corners.append(i)
    if not corners:
        return pl
    per_corner = budget / len(corners)

    windows: dict[int, Fraction] = {}
    for i in corners:
        r = pl.breakpoints[i]
        left_len = r - pl.breakpoints[i - 1]
        right_len = pl.breakpoints[i + 1] - r
        w = min(left_len, right_len) * max_window_fraction
        for _ in range(60):
            if _fillet_ok(pl, i, w, per_corner):
                break
            w = w / 2
        else:
            raise BudgetExceeded(
                f"no fillet window at corner r={float(r):.6g} meets the "
                f"volume budget {float(per_corner):.3g}"
            )
        windows[i] = w

    bps: list[Fraction] = [pl.breakpoints[0]]
    h1s, h2s = [], []
    for i in range(pl.num_segments):
        seg_end = pl.breakpoints[i + 1]
        right_cut = seg_end - windows[i + 1] if (i + 1) in windows else seg_end
        h1s.append(pl.h1_polys[i])
        h2s.append(pl.h2_polys[i])
        bps.append(right_cut)
        if (i + 1) in windows:
            f1, f2 = _fillet_polys(pl, i + 1, windows[i + 1])
            h1s.append(f1)
            h2s.append(f2)
            bps.append(seg_end + windows[i + 1])
    # trim the left starts (the linear pieces keep their polys; only the
    # partition moved, and each linear poly is valid on all of its segment)
    return cv.ProfileCurve(tuple(bps), tuple(h1s), tuple(h2s),
                           (True,) * len(h1s))


def _fillet_polys(pl: cv.ProfileCurve, i: int, w: Fraction):
    """Quadratic fillet components across [r_i - w, r_i + w]."""
    r = pl.breakpoints[i]
    r_l = r - w
    out = []
    for polys in (pl.h1_polys, pl.h2_polys):
        a = px.peval(polys[i - 1], r_l)
        vm = px.peval(px.pderiv(polys[i - 1]), r_l)
        vp = px.peval(px.pderiv(polys[i]), r + w)
        k = (vp - vm) / (4 * w)
        local = px.poly([a, vm, k])  # in s = r - r_l
        out.append(px.pcompose(local, px.poly([-r_l, 1])))
    return out[0], out[1]


def _fillet_volume_change(pl: cv.ProfileCurve, i: int, w: Fraction) -> Fraction:
    r = pl.breakpoints[i]
    f1, f2 = _fillet_polys(pl, i, w)
    wr_f = px.psub(px.pmul(f1, px.pderiv(f2)), px.pmul(f2, px.pderiv(f1)))
    new = -px.integrate_over(wr_f, r - w, r + w)
    old = -(px.integrate_over(pl.wronskian_poly(i - 1), r - w, r)
            + px.integrate_over(pl.wronskian_poly(i), r, r + w))
    return new - old


def _fillet_ok(pl: cv.ProfileCurve, i: int, w: Fraction, per_corner: Fraction) -> bool:
    if abs(_fillet_volume_change(pl, i, w)) >= per_corner:
        return False
    r = pl.breakpoints[i]
    f1, f2 = _fillet_polys(pl, i, w)
    wr_f = px.psub(px.pmul(f1, px.pderiv(f2)), px.pmul(f2, px.pderiv(f1)))
    ok, _ = px.certify_negative(wr_f, r - w, r + w)
    return ok


# ---------------------------------------------------------------------------
# normalization of straight pieces


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a x + b y == g == gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
        old_t, t = t, old_t - qt * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def normalize_linear_piece(curve: cv.ProfileCurve) -> NormalizedPiece:
    """Bring a one-segment straight contact piece to the standard frame.

    Applies the determinant-one integer torus map that kills the first
    component's variation, then remaps the radius affinely onto [-1, 1].
    The outputs satisfy exactly: volume == 2 a b and minimal period == a.
    """
    if curve.num_segments != 1:
        raise InvalidGeometry("normalization expects a single straight piece")
    h1, h2 = curve.h1_polys[0], curve.h2_polys[0]
    if px.degree(h1) > 1 or px.degree(h2) > 1:
        raise InvalidGeometry("piece is not straight")
    a1 = h1[1] if len(h1) > 1 else Fraction(0)
    b1 = h2[1] if len(h2) > 1 else Fraction(0)
    if a1 == 0 and b1 == 0:
        raise DegeneratePosition("stationary piece cannot be normalized")
    cv.require_contact(curve)
    g = px.gcd_fraction(a1, b1)
    d1, d2 = int(a1 / g), int(b1 / g)
    gg, x, y = _ext_gcd(d1, d2)
    if gg != 1:
        raise ArithmeticError("primitive velocity direction was not coprime")
    m1 = (-d2, d1)
    m2 = (-x, -y)
    # transformed components (covector rows applied to (h1, h2))
    th1 = px.padd(px.pscale(h1, m1[0]), px.pscale(h2, m1[1]))
    th2 = px.padd(px.pscale(h1, m2[0]), px.pscale(h2, m2[1]))
    if px.degree(th1) > 0:
        raise ArithmeticError("first component failed to become constant")
    if th1[0] < 0:
        m1, m2 = (-m1[0], -m1[1]), (-m2[0], -m2[1])
        th1, th2 = px.pscale(th1, -1), px.pscale(th2, -1)
    r0, r1 = curve.domain
    half = (r1 - r0) / 2
    affine = px.poly([r0 + half, half])  # [-1, 1] -> [r0, r1]
    th2m = px.pcompose(th2, affine)
    a = th1[0]
    b = -(th2m[1] if len(th2m) > 1 else Fraction(0))
    c = -th2m[0]
    std = cv.ProfileCurve.from_segments(
        (Fraction(-1), Fraction(1)), (th1,), (px.poly([-c, -b]),)
    )
    if cv.volume_exact(std) != cv.volume_exact(curve):
        raise ArithmeticError("normalization failed to preserve volume")
    if 2 * a * b != cv.volume_exact(curve):
        raise ArithmeticError("standard-form volume identity 2ab failed")
    mid = (r0 + r1) / 2
    if cv.minimal_period_at(curve, mid).value != a:
        raise ArithmeticError("standard-form period identity failed")
    return NormalizedPiece(
        a=a, b=b, c=c,
        matrix=(m1, m2),
        curve=std,
        original_domain=(r0, r1),
    )


# ---------------------------------------------------------------------------
# certification and driver


def _segment_ratio_endpoints(curve: cv.ProfileCurve, i: int) -> float:
    """min of |wr|/|h'| over a linear segment (attained at an endpoint)."""
    vals = []
    for r in (curve.breakpoints[i], curve.breakpoints[i + 1]):
        wr = abs(float(px.peval(curve.wronskian_poly(i), r)))
        d1 = float(px.peval(px.pderiv(curve.h1_polys[i]), r))
        d2 = float(px.peval(px.pderiv(curve.h2_polys[i]), r))
        vals.append(wr / math.hypot(d1, d2))
    return min(vals)


def _ratio_at(curve: cv.ProfileCurve, r: float) -> float:
    wr = abs(cv.wronskian(curve, r))
    d1, d2 = curve.hprime(r)
    return wr / math.hypot(d1, d2)


def certify_approximation(
    original: cv.ProfileCurve,
    rationalized: cv.ProfileCurve,
    epsilon,
) -> CertificationReport:
    """Compare a rationalized curve against its source.

    Checks contact of both curves, the exact volume difference, and the
    period-density factor |wr|/|h'| of every rationalized segment against the
    source at a slope-matched radius (straight segments via exact anchors,
    fillets via float anchors at the window midpoint).
    """
    eps = float(epsilon)
    cert_o = cv.check_contact(original)
    cert_r = cv.check_contact(rationalized)
    vol_o = cv.volume_exact(original)
    vol_r = cv.volume_exact(rationalized)
    vdiff = abs(float(vol_r - vol_o))

    factors: list[SegmentFactor] = []
    misses = 0
    lo_d, hi_d = original.domain
    for i in range(rationalized.num_segments):
        d1 = px.pderiv(rationalized.h1_polys[i])
        d2 = px.pderiv(rationalized.h2_polys[i])
        is_linear = px.degree(d1) == 0 and px.degree(d2) == 0
        a_i, b_i = rationalized.breakpoints[i], rationalized.breakpoints[i + 1]
        if is_linear:
            dv1, dv2 = d1[0], d2[0]
            gi = px.gcd_fraction(dv2, dv1)
            slope = cv.RationalSlope(int(-dv1 / gi), int(dv2 / gi))
            pad = (b_i - a_i)
            span = (max(lo_d, a_i - pad), min(hi_d, b_i + pad))
            try:
                anchor = float(mean_value_anchor(original, span[0], span[1], slope))
            except NoRoot:
                try:
                    anchor = float(mean_value_anchor(original, lo_d, hi_d, slope))
                except NoRoot:
                    misses += 1
                    continue
            m_rat = _segment_ratio_endpoints(rationalized, i)
            m_org = _ratio_at(original, anchor)
            factors.append(SegmentFactor(i, slope, anchor, m_rat / m_org, False))
        else:
            mid = float((a_i + b_i) / 2)
            dv1 = px.peval_float(d1, mid)
            dv2 = px.peval_float(d2, mid)
            anchor = _float_direction_anchor(original, (dv2, -dv1), mid)
            if anchor is None:
                misses += 1
                continue
            m_rat = _ratio_at(rationalized, mid)
            m_org = _ratio_at(original, anchor)
            factors.append(SegmentFactor(i, None, anchor, m_rat / m_org, True))

    fmin = min((f.factor for f in factors), default=math.inf)
    fmax = max((f.factor for f in factors), default=0.0)
    passed = (
        cert_o.passed
        and cert_r.passed
        and vdiff < eps
        and fmin >= 1 - eps
        and fmax <= 1 + 2 * eps
        and misses == 0
    )
    return CertificationReport(
        contact_original=cert_o.passed,
        contact_rationalized=cert_r.passed,
        volume_original=float(vol_o),
        volume_rationalized=float(vol_r),
        volume_difference=vdiff,
        min_period_factor=fmin,
        max_period_factor=fmax,
        factors=tuple(factors),
        anchor_misses=misses,
        epsilon=eps,
        passed=passed,
    )


def rationalize(
    curve: cv.ProfileCurve,
    epsilon,
    max_vertices: int = 512,
) -> RationalizationResult:
    """Full pipeline: vertices, snapped slopes, exact vertices, fillets,
    certification.  Tolerances start from the budget quarters and are halved
    until the certificate passes."""
    budget = ApproxBudget(px.as_fraction(epsilon))
    cv.require_contact(curve)
    eps = float(budget.total)
    c1_tol = min(0.3, max(2e-3, eps))
    snap_tol = budget.quarter / 4
    last_report = None
    for attempt in range(6):
        vertices = select_vertices(curve, c1_tol, max_vertices)
        pl, infos, slopes = build_pl_curve(curve, vertices, snap_tol)
        smoothed = smooth_corners(pl, budget.quarter)
        report = certify_approximation(curve, smoothed, eps)
        if report.passed:
            return RationalizationResult(
                curve=smoothed,
                pl_curve=pl,
                vertices=tuple(v.radius for v in infos),
                slopes=tuple(slopes),
                report=report,
                epsilon=eps,
                iterations=attempt + 1,
            )
        last_report = report
        c1_tol /= 2
        snap_tol = snap_tol / 2
    raise CertificationFailed(
        "rationalization did not certify within the retry budget",
        report=last_report,
    )
