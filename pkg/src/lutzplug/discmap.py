"""Area-preserving disc maps built from radial rotation atoms.

An atom rotates each point about a fixed center by an angle depending only on
the distance to that center; such maps preserve area exactly and have a
closed-form Jacobian.  Compositions of atoms give the plug maps.

The action one-form of a map phi is sigma = Dphi^T lambda(phi(z)) - lambda(z)
where lambda = (x dy - y dx)/2 primitivizes the area form; sigma is closed for
area preservers.  For a single atom about center c,

    sigma_atom = d[ F(|z - c|) + (1/2) c x (atom(z) - z) ]

with F(s) = integral_0^s (t^2/2) alpha'(t) dt, so sigma_atom is exact with an
explicit primitive (F is a degree-7 polynomial in the ramp variable).  For a
composition the primitives pull back through the prefix maps, giving the
generating function tau in closed form with no quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

def _step_deriv_coeffs(k: int) -> np.ndarray:
    """Coefficients of S'_k(x) = C_k x^k (1-x)^k, the derivative of the
    order-(2k+1) smoothstep; S_k is C^k across the ramp ends."""
    binom = np.zeros(k + 1)
    coeff = 1.0
    for j in range(k + 1):
        binom[j] = coeff * (-1.0) ** j
        coeff = coeff * (k - j) / (j + 1)
    shifted = np.zeros(2 * k + 1)  # x^k * (1-x)^k
    shifted[k : 2 * k + 1] = binom
    norm = math.factorial(2 * k + 1) / (math.factorial(k) ** 2)
    return norm * shifted


def smoothstep(x: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 below 0, 1 above 1, C^2 across the ramp."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 + x * (-15.0 + 6.0 * x))


def smoothstep_deriv(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * xc**2 * (1.0 - xc) ** 2, 0.0)


@dataclass(frozen=True)
class RadialProfile:
    """Rotation angle by distance: ``inner_angle`` out to ``inner_radius``,
    easing to exactly zero at ``outer_radius`` along a smoothstep ramp of
    regularity C^smoothness (2 = quintic, 4 = nonic)."""

    inner_angle: float
    inner_radius: float
    outer_radius: float
    smoothness: int = 2
    _step_coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    _dstep_coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    _potential_coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.inner_radius < self.outer_radius:
            raise ValueError("profile radii must satisfy 0 <= inner < outer")
        dstep = _step_deriv_coeffs(self.smoothness)
        object.__setattr__(self, "_dstep_coeffs", dstep)
        object.__setattr__(self, "_step_coeffs", npoly.polyint(dstep))
        # F(s) = -(A/2) * int_0^x (r0 + w y)^2 S'(y) dy with x = (s - r0)/w;
        # the w from dt = w dy cancels the 1/w in alpha'.
        w = self.outer_radius - self.inner_radius
        radius_sq = np.array([self.inner_radius**2, 2.0 * self.inner_radius * w, w**2])
        grow = npoly.polyint(npoly.polymul(radius_sq, dstep))
        object.__setattr__(self, "_potential_coeffs", -0.5 * self.inner_angle * grow)

    def angle(self, s: np.ndarray) -> np.ndarray:
        """Exactly ``inner_angle`` inside the ramp and exactly 0.0 outside,
        so downstream identity masks are bit-reliable."""
        s = np.asarray(s, dtype=float)
        x = (s - self.inner_radius) / (self.outer_radius - self.inner_radius)
        xc = np.clip(x, 0.0, 1.0)
        mid = self.inner_angle * (1.0 - npoly.polyval(xc, self._step_coeffs))
        return np.where(x >= 1.0, 0.0, np.where(x <= 0.0, self.inner_angle, mid))

    def dangle(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        width = self.outer_radius - self.inner_radius
        x = (s - self.inner_radius) / width
        inside = (x > 0.0) & (x < 1.0)
        xc = np.clip(x, 0.0, 1.0)
        val = -self.inner_angle * npoly.polyval(xc, self._dstep_coeffs) / width
        return np.where(inside, val, 0.0)

    def potential(self, s: np.ndarray) -> np.ndarray:
        """F(s) = integral_0^s (t^2/2) alpha'(t) dt, evaluated exactly."""
        s = np.asarray(s, dtype=float)
        x = np.clip(
            (s - self.inner_radius) / (self.outer_radius - self.inner_radius), 0.0, 1.0
        )
        return npoly.polyval(x, self._potential_coeffs)

    @property
    def potential_at_infinity(self) -> float:
        return float(npoly.polyval(1.0, self._potential_coeffs))


@dataclass(frozen=True)
class RotationAtom:
    """z -> c + R(alpha(|z - c|)) (z - c) for a radial angle profile alpha."""

    center: tuple[float, float]
    profile: RadialProfile

    def support_radius(self) -> float:
        return self.profile.outer_radius

    def apply(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        w = pts - np.asarray(self.center)
        s = np.hypot(w[..., 0], w[..., 1])
        a = self.profile.angle(s)
        ca, sa = np.cos(a), np.sin(a)
        out = np.empty_like(w)
        out[..., 0] = ca * w[..., 0] - sa * w[..., 1] + self.center[0]
        out[..., 1] = sa * w[..., 0] + ca * w[..., 1] + self.center[1]
        # bit-exact identity outside the support (angle is exactly 0 there)
        return np.where((a == 0.0)[..., None], pts, out)

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        """Exact Jacobians, shape (..., 2, 2); determinant is identically 1.

        D = R(a) + a'(s) * (J R(a) w) (w/s)^T   with J the quarter turn.
        """
        pts = np.asarray(pts, dtype=float)
        w = pts - np.asarray(self.center)
        s = np.hypot(w[..., 0], w[..., 1])
        a = self.profile.angle(s)
        da = self.profile.dangle(s)
        ca, sa = np.cos(a), np.sin(a)
        rw_x = ca * w[..., 0] - sa * w[..., 1]
        rw_y = sa * w[..., 0] + ca * w[..., 1]
        safe = np.where(s > 0, s, 1.0)
        fac = np.where(s > 0, da / safe, 0.0)
        jac = np.empty(w.shape[:-1] + (2, 2))
        jac[..., 0, 0] = ca + fac * (-rw_y) * w[..., 0]
        jac[..., 0, 1] = -sa + fac * (-rw_y) * w[..., 1]
        jac[..., 1, 0] = sa + fac * rw_x * w[..., 0]
        jac[..., 1, 1] = ca + fac * rw_x * w[..., 1]
        return jac

    def action_potential(self, pts: np.ndarray) -> np.ndarray:
        """Primitive of this atom's action one-form (zero at the center,
        constant outside the support)."""
        pts = np.asarray(pts, dtype=float)
        w = pts - np.asarray(self.center)
        s = np.hypot(w[..., 0], w[..., 1])
        img = self.apply(pts)
        cx, cy = self.center
        cross = 0.5 * (cx * (img[..., 1] - pts[..., 1]) - cy * (img[..., 0] - pts[..., 0]))
        return self.profile.potential(s) + cross


class DiscMap:
    """Composition of rotation atoms (applied left to right)."""

    def __init__(self, atoms: Sequence[RotationAtom]):
        self.atoms = list(atoms)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        out = np.asarray(pts, dtype=float)
        for atom in self.atoms:
            out = atom.apply(out)
        return out

    def apply_n(self, pts: np.ndarray, n: int) -> np.ndarray:
        out = np.asarray(pts, dtype=float)
        for _ in range(n):
            out = self(out)
        return out

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        jac = np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()
        cur = pts
        for atom in self.atoms:
            jac = atom.jacobian(cur) @ jac
            cur = atom.apply(cur)
        return jac

    def flow(self, pts: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(phi^n(pts), D phi^n(pts)) sharing one pass through the chain."""
        pts = np.asarray(pts, dtype=float)
        jac = np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()
        cur = pts
        for _ in range(n):
            for atom in self.atoms:
                jac = atom.jacobian(cur) @ jac
                cur = atom.apply(cur)
        return cur, jac

    def jacobian_n(self, pts: np.ndarray, n: int) -> np.ndarray:
        return self.flow(pts, n)[1]

    def det_jacobian(self, pts: np.ndarray) -> np.ndarray:
        j = self.jacobian(pts)
        return j[..., 0, 0] * j[..., 1, 1] - j[..., 0, 1] * j[..., 1, 0]

    @property
    def potential_at_infinity(self) -> float:
        return sum(a.profile.potential_at_infinity for a in self.atoms)

    def action_potential(self, pts: np.ndarray, boundary_value: float = 0.0) -> np.ndarray:
        """tau with d tau = sigma, equal to ``boundary_value`` wherever the
        map is the identity beyond all atom supports.

        Each atom's primitive is pulled back through the prefix composition;
        the sum is exact, so no quadrature error enters tau.
        """
        pts = np.asarray(pts, dtype=float)
        total = np.full(pts.shape[:-1], boundary_value - self.potential_at_infinity)
        cur = pts
        for atom in self.atoms:
            total = total + atom.action_potential(cur)
            cur = atom.apply(cur)
        return total


def fd_jacobian(func: Callable, pts: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Fourth-order central-difference Jacobian, the independent oracle for
    the analytic chain-rule Jacobians."""
    pts = np.asarray(pts, dtype=float)
    jac = np.empty(pts.shape[:-1] + (2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = 1.0
        f1 = func(pts + 2 * h * e)
        f2 = func(pts + h * e)
        f3 = func(pts - h * e)
        f4 = func(pts - 2 * h * e)
        d = (-f1 + 8 * f2 - 8 * f3 + f4) / (12 * h)
        jac[..., 0, k] = d[..., 0]
        jac[..., 1, k] = d[..., 1]
    return jac


def lambda_form(pts: np.ndarray) -> np.ndarray:
    """Components of the primitive lambda = (x dy - y dx)/2 of the area form."""
    pts = np.asarray(pts, dtype=float)
    out = np.empty_like(pts)
    out[..., 0] = -0.5 * pts[..., 1]
    out[..., 1] = 0.5 * pts[..., 0]
    return out


def sigma_form(disc_map: DiscMap, pts: np.ndarray) -> np.ndarray:
    """sigma = Dphi^T lambda(phi(z)) - lambda(z), computed from the Jacobian
    chain (independent of the closed-form potentials)."""
    pts = np.asarray(pts, dtype=float)
    img, jac = disc_map.flow(pts, 1)
    lam_img = lambda_form(img)
    pulled = np.einsum("...ji,...j->...i", jac, lam_img)
    return pulled - lambda_form(pts)


GAUSS7_NODES, GAUSS7_WEIGHTS = np.polynomial.legendre.leggauss(7)
GAUSS15_NODES, GAUSS15_WEIGHTS = np.polynomial.legendre.leggauss(15)


def line_integral_sigma(disc_map: DiscMap, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gauss-Legendre integral of sigma along straight segments a -> b.

    a, b: arrays of shape (..., 2).  Used to cross-check tau differences.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    delta = b - a
    t = 0.5 * (GAUSS7_NODES + 1.0)
    total = np.zeros(a.shape[:-1])
    for tk, wk in zip(t, GAUSS7_WEIGHTS):
        pts = a + tk * delta
        sig = sigma_form(disc_map, pts)
        total = total + wk * np.einsum("...k,...k->...", sig, delta)
    return 0.5 * total


def line_integral_sigma_dense(
    disc_map: DiscMap, a: np.ndarray, b: np.ndarray, panels: int = 12
) -> np.ndarray:
    """Panelled Gauss-15 for edges that pass close to small-scale atoms."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    delta = b - a
    edges = len(a)
    knots = np.linspace(0.0, 1.0, panels + 1)
    t0 = knots[:-1]
    widths = knots[1:] - knots[:-1]
    # nodes tensor: (edges, panels, order)
    tt = t0[None, :, None] + widths[None, :, None] * 0.5 * (GAUSS15_NODES + 1.0)[None, None, :]
    pts = a[:, None, None, :] + tt[..., None] * delta[:, None, None, :]
    sig = sigma_form(disc_map, pts.reshape(-1, 2)).reshape(edges, panels, len(GAUSS15_NODES), 2)
    proj = np.einsum("epgk,ek->epg", sig, delta)
    weighted = np.einsum("epg,g->ep", proj, GAUSS15_WEIGHTS)
    return 0.5 * (weighted * widths[None, :]).sum(axis=1)
