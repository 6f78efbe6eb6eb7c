"""Profile curves on a thickened torus and their contact-form analysis.

A profile curve is a piecewise-polynomial map r -> (h1(r), h2(r)) on an
interval.  It induces the 1-form h1*dx1 + h2*dx2 on interval x 2-torus whose
contact condition, Reeb direction, closed-orbit periods, and volume are what
this module computes.  All structural quantities are available both as fast
floats and as exact Fractions backed by Sturm-chain certificates.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import polyx as px
from .errors import (
    ContactViolation,
    DegeneratePosition,
    InvalidGeometry,
    NonMonotoneMap,
    OutOfRange,
)

C0_JOIN_TOL = 1e-9
MAX_SEGMENT_DEGREE = 3


# ---------------------------------------------------------------------------
# small value types


@dataclass(frozen=True)
class RationalSlope:
    """Reduced slope p/q of a torus direction.

    The primitive direction vector is (q, p); q == 0 encodes a vertical
    direction (infinite slope).  Normalised so q >= 0 and gcd(|p|, |q|) == 1,
    with (p, q) == (1, 0) for the vertical.
    """

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if p == 0 and q == 0:
            raise DegeneratePosition("slope of the zero direction")
        g = math.gcd(abs(p), abs(q))
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def is_vertical(self) -> bool:
        return self.q == 0

    @property
    def value(self) -> Fraction | None:
        return None if self.q == 0 else Fraction(self.p, self.q)

    @property
    def direction(self) -> tuple[int, int]:
        return (self.q, self.p)

    @property
    def norm(self) -> float:
        return math.hypot(self.p, self.q)

    def __str__(self) -> str:
        return "inf" if self.q == 0 else f"{self.p}/{self.q}"


@dataclass(frozen=True)
class IrrationalSlope:
    """A slope known only as a float target (used when snapping to rationals)."""

    approx: float

    @property
    def is_vertical(self) -> bool:
        return math.isinf(self.approx)


@dataclass(frozen=True)
class ReebVector:
    """Reeb direction coefficients (u1, u2) at a radius, exact and float."""

    u1: float
    u2: float
    exact_u1: Fraction | None = None
    exact_u2: Fraction | None = None


@dataclass(frozen=True)
class TorusPeriod:
    """Minimal return time of the Reeb flow at a radius.

    ``value`` is the exact rational period when available; ``exact`` records
    whether the underlying curve data is authoritative (True) or a sampled
    approximation of some other curve (False).
    """

    value: Fraction | None
    approximate: float
    exact: bool
    slope: RationalSlope | None = None
    radius: Fraction | float | None = None


@dataclass(frozen=True)
class ContactCertificate:
    """Outcome of a strict-negativity check of the wronskian on the domain.

    When ``passed``, ``max_wronskian`` is a certified upper bound (< 0) for
    the wronskian over the whole domain.  Otherwise ``witness`` is a radius
    where it fails to be negative.
    """

    passed: bool
    max_wronskian: float
    witness: float | None = None
    segment: int | None = None

    def require(self) -> None:
        if not self.passed:
            raise ContactViolation(
                f"wronskian is not negative near r={self.witness:.6g} "
                f"(segment {self.segment})",
                witness=self.witness,
            )


@dataclass(frozen=True)
class BruteForceResult:
    """Minimum over all closed Reeb orbits with direction denominator <= bound."""

    period: float
    slope: RationalSlope | None
    radius: float | None
    candidates_checked: int


# ---------------------------------------------------------------------------
# the curve


@dataclass(eq=False)
class ProfileCurve:
    """Piecewise-polynomial curve r -> (h1(r), h2(r)), degree <= 3 per piece.

    ``breakpoints`` has one more entry than there are segments; polynomials
    are in the global variable r with exact Fraction coefficients.  The
    ``exact`` flag per segment records whether the polynomial is the
    authoritative definition (True) or a sampled stand-in for a
    non-polynomial curve (False).  Joins must agree to C0_JOIN_TOL; the
    constructor records whether they agree exactly (``c0_exact``) and whether
    first derivatives also join exactly (``is_c1``).
    """

    breakpoints: tuple[Fraction, ...]
    h1_polys: tuple[px.Poly, ...]
    h2_polys: tuple[px.Poly, ...]
    exact: tuple[bool, ...]
    c0_exact: bool = field(init=False)
    is_c1: bool = field(init=False)

    def __post_init__(self):
        bp = tuple(px.as_fraction(b) for b in self.breakpoints)
        h1 = tuple(px.poly(p) for p in self.h1_polys)
        h2 = tuple(px.poly(p) for p in self.h2_polys)
        ex = tuple(bool(e) for e in self.exact)
        if not (len(bp) - 1 == len(h1) == len(h2) == len(ex)) or len(bp) < 2:
            raise InvalidGeometry("segment/breakpoint count mismatch")
        for a, b in zip(bp, bp[1:]):
            if not a < b:
                raise InvalidGeometry("breakpoints must be strictly increasing")
        for p in h1 + h2:
            if px.degree(p) > MAX_SEGMENT_DEGREE:
                raise InvalidGeometry(
                    f"segment degree {px.degree(p)} exceeds {MAX_SEGMENT_DEGREE}"
                )
        c0_exact = True
        is_c1 = True
        for i in range(1, len(bp) - 1):
            r = bp[i]
            for left, right in ((h1[i - 1], h1[i]), (h2[i - 1], h2[i])):
                lv, rv = px.peval(left, r), px.peval(right, r)
                if abs(float(lv - rv)) > C0_JOIN_TOL:
                    raise InvalidGeometry(
                        f"discontinuous join at r={float(r):.6g}: "
                        f"gap {float(lv - rv):.3g}"
                    )
                if lv != rv:
                    c0_exact = False
                if px.peval(px.pderiv(left), r) != px.peval(px.pderiv(right), r):
                    is_c1 = False
        self.breakpoints = bp
        self.h1_polys = h1
        self.h2_polys = h2
        self.exact = ex
        self.c0_exact = c0_exact
        self.is_c1 = is_c1 and c0_exact
        self._wr_cache: dict[int, px.Poly] = {}

    # -- structure ----------------------------------------------------------

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return (self.breakpoints[0], self.breakpoints[-1])

    @property
    def num_segments(self) -> int:
        return len(self.h1_polys)

    def segment_index(self, r) -> int:
        rf = px.as_fraction(r)
        lo, hi = self.domain
        if rf < lo or rf > hi:
            if abs(float(rf - lo)) <= 1e-9:
                return 0
            if abs(float(rf - hi)) <= 1e-9:
                return self.num_segments - 1
            raise OutOfRange(
                f"r={float(rf):.6g} outside domain "
                f"[{float(lo):.6g}, {float(hi):.6g}]"
            )
        i = bisect_right(self.breakpoints, rf) - 1
        return min(max(i, 0), self.num_segments - 1)

    def wronskian_poly(self, i: int) -> px.Poly:
        cached = self._wr_cache.get(i)
        if cached is None:
            h1, h2 = self.h1_polys[i], self.h2_polys[i]
            cached = px.psub(
                px.pmul(h1, px.pderiv(h2)), px.pmul(h2, px.pderiv(h1))
            )
            self._wr_cache[i] = cached
        return cached

    # -- evaluation ----------------------------------------------------------

    def h_exact(self, r) -> tuple[Fraction, Fraction]:
        rf = px.as_fraction(r)
        i = self.segment_index(rf)
        return px.peval(self.h1_polys[i], rf), px.peval(self.h2_polys[i], rf)

    def hprime_exact(self, r) -> tuple[Fraction, Fraction]:
        rf = px.as_fraction(r)
        i = self.segment_index(rf)
        return (
            px.peval(px.pderiv(self.h1_polys[i]), rf),
            px.peval(px.pderiv(self.h2_polys[i]), rf),
        )

    def h(self, r) -> tuple[float, float]:
        a, b = self.h_exact(r)
        return float(a), float(b)

    def hprime(self, r) -> tuple[float, float]:
        a, b = self.hprime_exact(r)
        return float(a), float(b)

    def sample(self, rs: np.ndarray) -> dict[str, np.ndarray]:
        """Vectorised evaluation of h, h' and the wronskian at float radii."""
        rs = np.asarray(rs, dtype=float)
        out = {k: np.empty_like(rs) for k in ("h1", "h2", "dh1", "dh2", "wr")}
        edges = [float(b) for b in self.breakpoints]
        idx = np.clip(np.searchsorted(edges, rs, side="right") - 1, 0,
                      self.num_segments - 1)
        for i in range(self.num_segments):
            mask = idx == i
            if not mask.any():
                continue
            x = rs[mask]
            for key, p in (
                ("h1", self.h1_polys[i]),
                ("h2", self.h2_polys[i]),
                ("dh1", px.pderiv(self.h1_polys[i])),
                ("dh2", px.pderiv(self.h2_polys[i])),
                ("wr", self.wronskian_poly(i)),
            ):
                coeffs = [float(c) for c in reversed(p)]
                out[key][mask] = np.polyval(coeffs, x)
        return out

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_segments(cls, breakpoints, h1_polys, h2_polys, exact=None):
        n = len(h1_polys)
        if exact is None:
            exact = (True,) * n
        return cls(tuple(breakpoints), tuple(h1_polys), tuple(h2_polys),
                   tuple(exact))

    @classmethod
    def linear_piece(cls, a, b, c, domain=(-1, 1)) -> "ProfileCurve":
        """The standard straight piece h1 = a, h2 = -(b r + c)."""
        a, b, c = px.as_fraction(a), px.as_fraction(b), px.as_fraction(c)
        lo, hi = px.as_fraction(domain[0]), px.as_fraction(domain[1])
        return cls((lo, hi), (px.poly([a]),), (px.poly([-c, -b]),), (True,))

    @classmethod
    def from_functions(
        cls,
        f1: Callable[[float], float],
        f2: Callable[[float], float],
        domain: tuple[float, float] = (-1.0, 1.0),
        segments: int = 64,
        df1: Callable[[float], float] | None = None,
        df2: Callable[[float], float] | None = None,
    ) -> "ProfileCurve":
        """Cubic-Hermite sampling of a smooth curve.

        Adjacent segments share node values and derivatives, so joins are
        exact and the result is C1.  Segments are flagged non-exact since the
        polynomials stand in for the sampled functions.
        """

        def fd(f, x, h=1e-6):
            return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)

        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi or segments < 1:
            raise InvalidGeometry("bad sampling domain")
        nodes = [lo + (hi - lo) * k / segments for k in range(segments + 1)]
        vals1 = [px.as_fraction(f1(t)) for t in nodes]
        vals2 = [px.as_fraction(f2(t)) for t in nodes]
        der1 = [px.as_fraction(df1(t) if df1 else fd(f1, t)) for t in nodes]
        der2 = [px.as_fraction(df2(t) if df2 else fd(f2, t)) for t in nodes]
        bp = tuple(px.as_fraction(t) for t in nodes)
        h1s, h2s = [], []
        for k in range(segments):
            dt = bp[k + 1] - bp[k]
            # s(r) = (r - t_k)/dt; Hermite basis composed exactly
            s = px.poly([-bp[k] / dt, 1 / dt])
            for vals, ders, outlist in (
                (vals1, der1, h1s), (vals2, der2, h2s)
            ):
                v0, v1 = vals[k], vals[k + 1]
                d0, d1 = ders[k] * dt, ders[k + 1] * dt
                # p(s) = v0 + d0 s + (3(v1-v0) - 2d0 - d1) s^2
                #        + (2(v0-v1) + d0 + d1) s^3
                ps = px.poly([
                    v0,
                    d0,
                    3 * (v1 - v0) - 2 * d0 - d1,
                    2 * (v0 - v1) + d0 + d1,
                ])
                outlist.append(px.pcompose(ps, s))
        return cls(bp, tuple(h1s), tuple(h2s), (False,) * segments)

    def concat(self, other: "ProfileCurve") -> "ProfileCurve":
        if self.breakpoints[-1] != other.breakpoints[0]:
            raise InvalidGeometry("curve domains do not chain exactly")
        return ProfileCurve(
            self.breakpoints + other.breakpoints[1:],
            self.h1_polys + other.h1_polys,
            self.h2_polys + other.h2_polys,
            self.exact + other.exact,
        )


# ---------------------------------------------------------------------------
# pointwise analysis


def wronskian_exact(curve: ProfileCurve, r) -> Fraction:
    rf = px.as_fraction(r)
    return px.peval(curve.wronskian_poly(curve.segment_index(rf)), rf)


def wronskian(curve: ProfileCurve, r) -> float:
    return float(wronskian_exact(curve, r))


def check_contact(curve: ProfileCurve, slack=Fraction(1, 10**9)) -> ContactCertificate:
    """Certify that the wronskian is strictly negative on the whole domain."""
    worst = None
    for i in range(curve.num_segments):
        a, b = curve.breakpoints[i], curve.breakpoints[i + 1]
        ok, val = px.certify_negative(curve.wronskian_poly(i), a, b, slack)
        if not ok:
            return ContactCertificate(
                passed=False,
                max_wronskian=float(px.peval(curve.wronskian_poly(i), val)),
                witness=float(val),
                segment=i,
            )
        worst = val if worst is None else max(worst, val)
    return ContactCertificate(passed=True, max_wronskian=float(worst))


def require_contact(curve: ProfileCurve) -> ContactCertificate:
    cert = check_contact(curve)
    cert.require()
    return cert


def reeb_at(curve: ProfileCurve, r) -> ReebVector:
    """Reeb coefficients (u1, u2): h.u == 1 and h'.u == 0, exactly."""
    rf = px.as_fraction(r)
    h1p, h2p = curve.hprime_exact(rf)
    delta = wronskian_exact(curve, rf)
    if delta >= 0:
        raise ContactViolation(
            f"wronskian {float(delta):.3g} >= 0 at r={float(rf):.6g}",
            witness=float(rf),
        )
    u1, u2 = h2p / delta, -h1p / delta
    return ReebVector(u1=float(u1), u2=float(u2), exact_u1=u1, exact_u2=u2)


def slope_at(curve: ProfileCurve, r) -> RationalSlope:
    """Reduced slope of the Reeb direction (h2', -h1') at a radius."""
    h1p, h2p = curve.hprime_exact(r)
    if h1p == 0 and h2p == 0:
        raise DegeneratePosition(f"stationary curve point at r={float(r):.6g}")
    g = px.gcd_fraction(h2p, h1p)
    q0, p0 = int(h2p / g), int(-h1p / g)
    return RationalSlope(p=p0, q=q0)


def theta_at(curve: ProfileCurve, r) -> float:
    """Unsigned angle in (0, pi) between h and h' (contact <=> sin > 0)."""
    h1, h2 = curve.h(r)
    d1, d2 = curve.hprime(r)
    return math.atan2(-wronskian(curve, r), h1 * d1 + h2 * d2)


def minimal_period_at(curve: ProfileCurve, r, slope: RationalSlope | None = None) -> TorusPeriod:
    """Exact minimal period of the closed Reeb orbit through radius r.

    The period is 1/g where g is the rational gcd of the Reeb coefficients.
    If ``slope`` is given it is validated against the curve's direction.
    """
    rf = px.as_fraction(r)
    i = curve.segment_index(rf)
    h1p, h2p = curve.hprime_exact(rf)
    if h1p == 0 and h2p == 0:
        raise DegeneratePosition(f"stationary curve point at r={float(rf):.6g}")
    delta = wronskian_exact(curve, rf)
    if delta >= 0:
        raise ContactViolation(
            f"wronskian {float(delta):.3g} >= 0 at r={float(rf):.6g}",
            witness=float(rf),
        )
    actual = slope_at(curve, rf)
    if slope is not None and slope != actual:
        raise OutOfRange(
            f"direction at r={float(rf):.6g} is {actual}, not {slope}"
        )
    u1, u2 = h2p / delta, -h1p / delta
    g = px.gcd_fraction(u1, u2)
    value = 1 / g
    return TorusPeriod(
        value=value,
        approximate=float(value),
        exact=curve.exact[i],
        slope=actual,
        radius=rf,
    )


# ---------------------------------------------------------------------------
# global quantities


def volume_exact(curve: ProfileCurve) -> Fraction:
    """Contact volume: minus the integral of the wronskian over the domain."""
    total = Fraction(0)
    for i in range(curve.num_segments):
        total -= px.integrate_over(
            curve.wronskian_poly(i), curve.breakpoints[i], curve.breakpoints[i + 1]
        )
    return total


def volume_piece(curve: ProfileCurve) -> float:
    return float(volume_exact(curve))


def segment_ratio_lower_bound(curve: ProfileCurve, i: int, scan: int = 256) -> Fraction:
    """Certified positive c with |wronskian| / |h'| > c on segment i.

    Certificate: wr(r)^2 - c^2 |h'(r)|^2 has no roots on the segment and is
    positive at one point, established by a Sturm chain.  Assumes contact.
    """
    a, b = curve.breakpoints[i], curve.breakpoints[i + 1]
    wr = curve.wronskian_poly(i)
    d1, d2 = px.pderiv(curve.h1_polys[i]), px.pderiv(curve.h2_polys[i])
    speed2 = px.padd(px.pmul(d1, d1), px.pmul(d2, d2))
    rs = np.linspace(float(a), float(b), scan)
    wrv = np.polyval([float(c) for c in reversed(wr)], rs)
    sp2 = np.polyval([float(c) for c in reversed(speed2)], rs)
    m0 = float(np.sqrt(np.min(wrv**2 / np.maximum(sp2, 1e-300))))
    if m0 <= 0:
        raise ContactViolation(
            f"wronskian vanishes on segment {i}", witness=float((a + b) / 2)
        )
    c = Fraction(m0 * 0.999).limit_denominator(10**9)
    wr2 = px.pmul(wr, wr)
    for _ in range(120):
        q = px.psub(wr2, px.pscale(speed2, c * c))
        if px.peval(q, a) > 0 and px.count_roots_closed(q, a, b) == 0:
            return c
        c = c * Fraction(63, 64)
    raise ArithmeticError(f"no certified ratio bound on segment {i}")


def tmin_lower_bound(curve: ProfileCurve) -> float:
    """Certified lower bound for every closed-orbit period of the Reeb flow.

    Any closed orbit has period |wr| * sqrt(p^2+q^2) / |h'| >= |wr| / |h'|,
    so the certified minimum of that ratio bounds all periods from below.
    """
    return float(min(
        segment_ratio_lower_bound(curve, i) for i in range(curve.num_segments)
    ))


# ---------------------------------------------------------------------------
# brute-force minimum period over bounded-denominator directions


def _period_at_direction(curve, i, slope: RationalSlope, rf: Fraction) -> float:
    """Period |wr| * |(q,p)| / |h'| at a radius where direction == (q,p).

    Uses segment i's own polynomials so that breakpoint radii are evaluated
    one-sidedly (at a corner each adjacent segment contributes its own value).
    """
    wr = abs(float(px.peval(curve.wronskian_poly(i), rf)))
    d1 = px.peval(px.pderiv(curve.h1_polys[i]), rf)
    d2 = px.peval(px.pderiv(curve.h2_polys[i]), rf)
    speed = math.hypot(float(d1), float(d2))
    if speed == 0:
        return math.inf
    return wr * slope.norm / speed


def _direction_roots(curve, i, slope: RationalSlope) -> list[Fraction]:
    """Radii in segment i where the curve direction is parallel to (q, p)."""
    a, b = curve.breakpoints[i], curve.breakpoints[i + 1]
    d1 = px.pderiv(curve.h1_polys[i])
    d2 = px.pderiv(curve.h2_polys[i])
    g = px.padd(px.pscale(d2, slope.p), px.pscale(d1, slope.q))
    if px.is_zero(g):
        # direction parallel to (q, p) along the whole segment: the period
        # ratio wr^2/|h'|^2 is rational in r, so candidates are the endpoints
        # plus the critical radii 2 wr' sp2 - wr sp2' == 0
        wr = curve.wronskian_poly(i)
        sp2 = px.padd(px.pmul(d1, d1), px.pmul(d2, d2))
        crit = px.psub(
            px.pscale(px.pmul(px.pderiv(wr), sp2), 2),
            px.pmul(wr, px.pderiv(sp2)),
        )
        out = [a, b]
        if not px.is_zero(crit) and px.degree(crit) > 0:
            out.extend((lo + hi) / 2
                       for lo, hi in px.isolate_roots(crit, a, b, (b - a) / 2**40))
        return out
    if px.degree(g) == 0:
        return []
    roots = []
    for lo, hi in px.isolate_roots(g, a, b, (b - a) / 2**40):
        roots.append((lo + hi) / 2)
    return roots


def _segment_angle_window(curve, i, grid: int) -> tuple[float, float]:
    """Unwrapped direction-angle range of segment i (angles mod pi)."""
    a, b = float(curve.breakpoints[i]), float(curve.breakpoints[i + 1])
    rs = np.linspace(a, b, grid)
    data = curve.sample(rs)
    ang = np.arctan2(-data["dh1"], data["dh2"])
    unwrapped = np.unwrap(2.0 * ang) / 2.0  # direction angles live mod pi
    margin = 4.0 * np.max(np.abs(np.diff(unwrapped))) if len(rs) > 1 else math.pi
    return float(unwrapped.min() - margin), float(unwrapped.max() + margin)


def _angle_in_window(phi: float, window: tuple[float, float]) -> bool:
    lo, hi = window
    if hi - lo >= math.pi:
        return True
    k = math.floor((lo - phi) / math.pi)
    for j in (k, k + 1, k + 2):
        if lo <= phi + j * math.pi <= hi:
            return True
    return False


def brute_force_min_period(
    curve: ProfileCurve, max_denominator: int, grid: int = 512
) -> BruteForceResult:
    """Minimum period over closed orbits whose direction (q, p) has q <= bound.

    Strategy: seed a best value by snapping grid slopes with continued
    fractions, then enumerate every primitive direction that could still beat
    it.  The certified per-segment lower bound m of |wr|/|h'| makes the
    enumeration finite: a direction of norm n has period >= m * n, so norms
    beyond best/m are pruned.
    """
    require_contact(curve)
    best = BruteForceResult(math.inf, None, None, 0)
    checked = 0
    m_lbs = [float(segment_ratio_lower_bound(curve, i))
             for i in range(curve.num_segments)]

    def consider(i: int, slope: RationalSlope) -> None:
        nonlocal best, checked
        if slope.q > max_denominator:
            return
        if slope.norm * m_lbs[i] >= best.period:
            return
        for rf in _direction_roots(curve, i, slope):
            checked += 1
            t = _period_at_direction(curve, i, slope, rf)
            if t < best.period:
                best = BruteForceResult(t, slope, float(rf), 0)

    # pass 1: seeds
    for i in range(curve.num_segments):
        a, b = float(curve.breakpoints[i]), float(curve.breakpoints[i + 1])
        d1 = px.pderiv(curve.h1_polys[i])
        d2 = px.pderiv(curve.h2_polys[i])
        if px.degree(d1) == 0 and px.degree(d2) == 0:
            if d1[0] == 0 and d2[0] == 0:
                raise DegeneratePosition(f"stationary segment {i}")
            consider(i, slope_at(curve, (curve.breakpoints[i] + curve.breakpoints[i + 1]) / 2))
            continue
        seen: set[tuple[int, int]] = set()
        for rfloat in np.linspace(a, b, grid):
            dd1 = px.peval_float(d1, rfloat)
            dd2 = px.peval_float(d2, rfloat)
            if dd1 == 0 and dd2 == 0:
                continue
            if abs(dd1) <= abs(dd2):  # slope p/q = -dh1/dh2 with |.| <= 1
                fr = Fraction(-dd1 / dd2).limit_denominator(max_denominator)
                cand = (fr.numerator, fr.denominator)
            else:  # steep: snap the reciprocal q/p = -dh2/dh1
                fr = Fraction(-dd2 / dd1).limit_denominator(max_denominator)
                cand = (fr.denominator, fr.numerator) if fr != 0 else (1, 0)
            if cand not in seen:
                seen.add(cand)
                try:
                    consider(i, RationalSlope(p=cand[0], q=cand[1]))
                except DegeneratePosition:
                    continue
        for endpoint in (curve.breakpoints[i], curve.breakpoints[i + 1]):
            d1v, d2v = px.peval(d1, endpoint), px.peval(d2, endpoint)
            if d1v == 0 and d2v == 0:
                continue
            g = px.gcd_fraction(d2v, d1v)
            pi0, qi0 = int(-d1v / g), int(d2v / g)
            consider(i, RationalSlope(p=pi0, q=qi0))

    # pass 2: exhaustive within the pruning radius
    for i in range(curve.num_segments):
        if math.isinf(best.period):
            break
        bound = best.period / m_lbs[i]
        window = _segment_angle_window(curve, i, grid)
        qcap = min(max_denominator, int(bound))
        if _angle_in_window(math.pi / 2, window) and 1.0 * m_lbs[i] < best.period:
            consider(i, RationalSlope(p=1, q=0))
        for q in range(1, qcap + 1):
            pcap = int(math.isqrt(max(0, int(bound * bound) - q * q + 1)))
            for p in range(-pcap, pcap + 1):
                if math.gcd(abs(p), q) != 1:
                    continue
                if not _angle_in_window(math.atan2(p, q), window):
                    continue
                consider(i, RationalSlope(p=p, q=q))

    return BruteForceResult(best.period, best.slope, best.radius, checked)


# ---------------------------------------------------------------------------
# reparametrization


def reparametrize(curve: ProfileCurve, map_coeffs, new_domain) -> ProfileCurve:
    """Pull the curve back along a strictly increasing polynomial map.

    ``map_coeffs`` are ascending coefficients of m(t); the new curve is
    h o m on ``new_domain``, which must map onto the curve's domain.  The
    composition is exact whenever each composite stays within the degree cap
    (always true for piecewise-linear curves under cubic maps); otherwise the
    result is resampled as Hermite cubics.
    """
    m = px.poly(map_coeffs)
    c, d = px.as_fraction(new_domain[0]), px.as_fraction(new_domain[1])
    if not c < d:
        raise InvalidGeometry("empty reparametrization domain")
    dm = px.pderiv(m)
    ok, val = px.certify_negative(px.pscale(dm, -1), c, d)
    if not ok:
        raise NonMonotoneMap(
            f"map derivative is not strictly positive near t={float(val):.6g}"
        )
    r_lo, r_hi = curve.domain
    if abs(float(px.peval(m, c) - r_lo)) > 1e-12 or abs(float(px.peval(m, d) - r_hi)) > 1e-12:
        raise OutOfRange("map image does not match the curve domain")

    # preimages of interior breakpoints (exact for affine maps)
    new_bp: list[Fraction] = [c]
    for bpv in curve.breakpoints[1:-1]:
        if px.degree(m) <= 1:
            t = (bpv - m[0]) / m[1]
        else:
            shifted = px.psub(m, (bpv,))
            boxes = px.isolate_roots(shifted, c, d, (d - c) / 2**60)
            if not boxes:
                raise OutOfRange("breakpoint preimage not found (map not onto)")
            t = (boxes[0][0] + boxes[0][1]) / 2
        new_bp.append(t)
    new_bp.append(d)

    composable = all(
        px.degree(p) * max(1, px.degree(m)) <= MAX_SEGMENT_DEGREE
        for p in curve.h1_polys + curve.h2_polys
    )
    if composable:
        h1s = tuple(px.pcompose(p, m) for p in curve.h1_polys)
        h2s = tuple(px.pcompose(p, m) for p in curve.h2_polys)
        return ProfileCurve(tuple(new_bp), h1s, h2s, curve.exact)

    # fallback: Hermite resampling of h o m
    per = max(2, 64 // max(1, len(new_bp) - 1))
    nodes: list[Fraction] = []
    for j in range(len(new_bp) - 1):
        step = (new_bp[j + 1] - new_bp[j]) / per
        nodes.extend(new_bp[j] + k * step for k in range(per))
    nodes.append(new_bp[-1])
    h1s, h2s = [], []
    for k in range(len(nodes) - 1):
        t0, t1 = nodes[k], nodes[k + 1]
        dt = t1 - t0
        seg_polys = []
        for polys in (curve.h1_polys, curve.h2_polys):
            vs, ds = [], []
            for t in (t0, t1):
                rt = px.peval(m, t)
                rt = min(max(rt, r_lo), r_hi)
                i = curve.segment_index(rt)
                vs.append(px.peval(polys[i], rt))
                ds.append(px.peval(px.pderiv(polys[i]), rt) * px.peval(dm, t))
            v0, v1 = vs
            d0, d1 = ds[0] * dt, ds[1] * dt
            ps = px.poly([
                v0, d0, 3 * (v1 - v0) - 2 * d0 - d1, 2 * (v0 - v1) + d0 + d1
            ])
            s = px.poly([-t0 / dt, 1 / dt])
            seg_polys.append(px.pcompose(ps, s))
        h1s.append(seg_polys[0])
        h2s.append(seg_polys[1])
    return ProfileCurve(
        tuple(nodes), tuple(h1s), tuple(h2s), (False,) * (len(nodes) - 1)
    )
