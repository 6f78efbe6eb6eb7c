"""Tests for area-preserving disc maps, the invariant Morse necklace, and
the mapping-torus plug contract.

Oracles used here are independent of the implementation paths they check:
closed-form potentials against adaptive quadrature, analytic Jacobians
against fourth-order finite differences, census Hessian spectra against
hand-derived stiffness formulas, and the generating function against Gauss
line integrals of the action one-form.
"""

import math
from dataclasses import replace

import numpy as np
import numpy.polynomial.polynomial as npoly
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lutzplug.discmap import (
    DiscMap,
    RadialProfile,
    RotationAtom,
    _step_deriv_coeffs,
    fd_jacobian,
    line_integral_sigma,
    line_integral_sigma_dense,
    sigma_form,
    smoothstep,
    smoothstep_deriv,
)
from lutzplug.errors import (
    BeadOutsideSector,
    BeadOverlap,
    ContractViolation,
    InvalidGeometry,
    InvalidNecklaceTopology,
)
from lutzplug.plug import (
    NecklaceSpec,
    Plug,
    PlugSpec,
    build_morse_necklace,
    build_plug,
    find_periodic_points,
    min_action,
    verify_necklace_census,
    verify_plug_contract,
)

TWO_PI = 2.0 * math.pi


def disc_points(rng, n, radius=0.85, center=(0.0, 0.0)):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    t = rng.uniform(0.0, TWO_PI, n)
    return np.asarray(center) + np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)


def quad_with_breaks(f, a, b, *breaks):
    pts = sorted(p for p in breaks if a < p < b)
    return quad(f, a, b, points=pts or None, limit=200)[0]


@pytest.fixture(scope="module")
def plug4():
    return build_plug(PlugSpec(n=4))


@pytest.fixture(scope="module")
def orbits4(plug4):
    return find_periodic_points(plug4)


# ---------------------------------------------------------------------------
# Radial profiles
# ---------------------------------------------------------------------------


class TestRadialProfile:
    def test_step_derivative_integrates_to_one(self):
        for k in range(1, 6):
            coeffs = _step_deriv_coeffs(k)
            total = npoly.polyval(1.0, npoly.polyint(coeffs))
            assert total == pytest.approx(1.0, abs=1e-13)

    def test_smoothstep_endpoints_and_monotonicity(self):
        assert smoothstep(np.array(-1.0)) == 0.0
        assert smoothstep(np.array(0.0)) == 0.0
        assert smoothstep(np.array(1.0)) == 1.0
        assert smoothstep(np.array(2.0)) == 1.0
        assert smoothstep(np.array(0.5)) == pytest.approx(0.5, abs=1e-15)
        xs = np.linspace(0.0, 1.0, 1001)
        assert np.all(np.diff(smoothstep(xs)) >= 0.0)
        assert smoothstep_deriv(np.array([0.0, 1.0, -0.5, 1.5])).tolist() == [
            0.0,
            0.0,
            0.0,
            0.0,
        ]

    def test_angle_plateaus_are_exact(self):
        prof = RadialProfile(inner_angle=-1.7, inner_radius=0.2, outer_radius=0.6)
        inside = np.array([0.0, 0.05, 0.2])
        outside = np.array([0.6, 0.61, 5.0])
        assert np.all(prof.angle(inside) == -1.7)
        assert np.all(prof.angle(outside) == 0.0)
        assert np.all(prof.dangle(inside) == 0.0)
        assert np.all(prof.dangle(outside) == 0.0)

    def test_dangle_matches_angle_derivative(self):
        prof = RadialProfile(inner_angle=0.8, inner_radius=0.3, outer_radius=0.7)
        s = np.linspace(0.32, 0.68, 41)
        h = 1e-6
        fd = (prof.angle(s + h) - prof.angle(s - h)) / (2 * h)
        assert np.max(np.abs(fd - prof.dangle(s))) < 1e-7

    @pytest.mark.parametrize("smoothness", [2, 4])
    def test_potential_matches_quadrature(self, smoothness):
        prof = RadialProfile(
            inner_angle=1.3,
            inner_radius=0.25,
            outer_radius=0.7,
            smoothness=smoothness,
        )

        def integrand(t):
            return 0.5 * t * t * float(prof.dangle(np.array(t)))

        for s in (0.1, 0.25, 0.33, 0.5, 0.69, 0.7, 0.9):
            upper = min(s, prof.outer_radius)
            expected = quad_with_breaks(integrand, 0.0, upper, 0.25, 0.7)
            assert float(prof.potential(np.array(s))) == pytest.approx(
                expected, abs=5e-12
            )
        assert prof.potential_at_infinity == pytest.approx(
            float(prof.potential(np.array(3.0))), abs=1e-15
        )

    def test_invalid_radii_raise(self):
        with pytest.raises(ValueError):
            RadialProfile(inner_angle=1.0, inner_radius=0.5, outer_radius=0.5)
        with pytest.raises(ValueError):
            RadialProfile(inner_angle=1.0, inner_radius=-0.1, outer_radius=0.5)


# ---------------------------------------------------------------------------
# Rotation atoms
# ---------------------------------------------------------------------------


class TestRotationAtom:
    def make_atom(self):
        prof = RadialProfile(
            inner_angle=-0.9, inner_radius=0.1, outer_radius=0.45, smoothness=2
        )
        return RotationAtom((0.15, -0.08), prof)

    def test_jacobian_matches_finite_differences(self):
        atom = self.make_atom()
        rng = np.random.default_rng(3)
        pts = disc_points(rng, 300, radius=0.6, center=atom.center)
        exact = atom.jacobian(pts)
        approx = fd_jacobian(atom.apply, pts, h=1e-5)
        assert np.max(np.abs(exact - approx)) < 5e-9

    def test_determinant_is_exactly_one(self):
        atom = self.make_atom()
        rng = np.random.default_rng(4)
        pts = disc_points(rng, 500, radius=0.6, center=atom.center)
        jac = atom.jacobian(pts)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        assert np.max(np.abs(det - 1.0)) < 5e-14

    def test_identity_outside_support_is_bit_exact(self):
        atom = self.make_atom()
        rng = np.random.default_rng(5)
        t = rng.uniform(0.0, TWO_PI, 200)
        radii = rng.uniform(atom.support_radius() * (1 + 1e-12), 3.0, 200)
        pts = np.asarray(atom.center) + radii[:, None] * np.stack(
            [np.cos(t), np.sin(t)], axis=-1
        )
        assert np.array_equal(atom.apply(pts), pts)

    def test_rotation_preserves_distance_to_center(self):
        atom = self.make_atom()
        rng = np.random.default_rng(6)
        pts = disc_points(rng, 400, radius=0.6, center=atom.center)
        before = np.hypot(*(pts - atom.center).T)
        after = np.hypot(*(atom.apply(pts) - atom.center).T)
        assert np.max(np.abs(after - before)) < 1e-14

    def test_inner_disc_rotates_rigidly(self):
        atom = self.make_atom()
        rng = np.random.default_rng(7)
        pts = disc_points(rng, 100, radius=0.099, center=atom.center)
        a = atom.profile.inner_angle
        w = pts - atom.center
        expected = atom.center + np.stack(
            [
                math.cos(a) * w[:, 0] - math.sin(a) * w[:, 1],
                math.sin(a) * w[:, 0] + math.cos(a) * w[:, 1],
            ],
            axis=-1,
        )
        assert np.max(np.abs(atom.apply(pts) - expected)) < 1e-15

    def test_action_potential_gradient_is_sigma(self):
        atom = self.make_atom()
        dmap = DiscMap([atom])
        rng = np.random.default_rng(8)
        pts = disc_points(rng, 200, radius=0.55, center=atom.center)
        sig = sigma_form(dmap, pts)
        h = 1e-5
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (atom.action_potential(pts + e) - atom.action_potential(pts - e)) / (
                2 * h
            )
            assert np.max(np.abs(fd - sig[:, k])) < 1e-7


@settings(max_examples=25, deadline=None)
@given(
    angle=st.floats(-3.0, 3.0).filter(lambda a: abs(a) > 1e-3),
    inner=st.floats(0.0, 0.45),
    width=st.floats(0.08, 0.5),
    cx=st.floats(-0.3, 0.3),
    cy=st.floats(-0.3, 0.3),
    smoothness=st.sampled_from([2, 3, 4]),
)
def test_atom_is_area_preserving_property(angle, inner, width, cx, cy, smoothness):
    prof = RadialProfile(angle, inner, inner + width, smoothness)
    atom = RotationAtom((cx, cy), prof)
    rng = np.random.default_rng(11)
    pts = disc_points(rng, 150, radius=inner + width + 0.2, center=(cx, cy))
    det = DiscMap([atom]).det_jacobian(pts)
    assert np.max(np.abs(det - 1.0)) < 1e-12
    dirs = np.stack([np.cos([0.3, 2.0, 4.1]), np.sin([0.3, 2.0, 4.1])], axis=-1)
    far = np.array([cx, cy]) + (inner + width) * 1.01 * dirs
    assert np.array_equal(atom.apply(far), far)


# ---------------------------------------------------------------------------
# Compositions
# ---------------------------------------------------------------------------


def make_test_map():
    bead = RotationAtom(
        (0.22, -0.1),
        RadialProfile(
            inner_angle=-0.9, inner_radius=0.05, outer_radius=0.16, smoothness=4
        ),
    )
    twist = RotationAtom(
        (0.0, 0.0),
        RadialProfile(
            inner_angle=1.1, inner_radius=0.5, outer_radius=0.85, smoothness=2
        ),
    )
    return DiscMap([bead, twist])


class TestDiscMap:
    def test_flow_matches_apply_and_finite_differences(self):
        dmap = make_test_map()
        rng = np.random.default_rng(12)
        pts = disc_points(rng, 150, radius=0.83)
        img, jac = dmap.flow(pts, 3)
        assert np.array_equal(img, dmap.apply_n(pts, 3))
        approx = fd_jacobian(lambda q: dmap.apply_n(q, 3), pts, h=1e-5)
        assert np.max(np.abs(jac - approx)) < 1e-7

    def test_composition_determinant_is_one(self):
        dmap = make_test_map()
        rng = np.random.default_rng(13)
        pts = disc_points(rng, 400, radius=0.83)
        assert np.max(np.abs(dmap.det_jacobian(pts) - 1.0)) < 1e-12

    def test_potential_at_infinity_sums_atoms(self):
        dmap = make_test_map()
        total = sum(a.profile.potential_at_infinity for a in dmap.atoms)
        assert dmap.potential_at_infinity == pytest.approx(total, abs=1e-15)

    def test_action_potential_equals_boundary_value_outside(self):
        dmap = make_test_map()
        t = np.linspace(0.0, TWO_PI, 64, endpoint=False)
        for r in (0.851, 0.93, 1.0):
            pts = r * np.stack([np.cos(t), np.sin(t)], axis=-1)
            tau = dmap.action_potential(pts, boundary_value=2.25)
            assert np.max(np.abs(tau - 2.25)) < 1e-14

    def test_action_potential_gradient_is_sigma(self):
        dmap = make_test_map()
        rng = np.random.default_rng(14)
        pts = disc_points(rng, 200, radius=0.83)
        sig = sigma_form(dmap, pts)
        h = 1e-5
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (
                dmap.action_potential(pts + e) - dmap.action_potential(pts - e)
            ) / (2 * h)
            assert np.max(np.abs(fd - sig[:, k])) < 5e-7

    def test_action_potential_difference_matches_line_integral(self):
        dmap = make_test_map()
        rng = np.random.default_rng(15)
        a = disc_points(rng, 12, radius=0.8)
        b = disc_points(rng, 12, radius=0.8)
        circles = [
            (atom.center, rho)
            for atom in dmap.atoms
            for rho in (atom.profile.inner_radius, atom.profile.outer_radius)
        ]
        for p, q in zip(a, b):
            delta = q - p

            def integrand(t):
                pts = (p + t * delta)[None, :]
                return float(sigma_form(dmap, pts)[0] @ delta)

            breaks = []
            for (cx, cy), rho in circles:
                f = p - np.array([cx, cy])
                aa = delta @ delta
                bb = 2.0 * (f @ delta)
                cc = f @ f - rho * rho
                disc = bb * bb - 4 * aa * cc
                if disc > 0:
                    for root in (
                        (-bb - math.sqrt(disc)) / (2 * aa),
                        (-bb + math.sqrt(disc)) / (2 * aa),
                    ):
                        if 0.0 < root < 1.0:
                            breaks.append(root)
            integral = quad(
                integrand, 0.0, 1.0, points=sorted(breaks) or None, limit=300
            )[0]
            diff = float(dmap.action_potential(q[None, :])[0]) - float(
                dmap.action_potential(p[None, :])[0]
            )
            assert diff == pytest.approx(integral, abs=1e-10)

    def test_gauss7_agrees_on_short_smooth_segments(self):
        dmap = make_test_map()
        rng = np.random.default_rng(16)
        # segments confined to the interior plateau, away from ramp kinks
        a = disc_points(rng, 30, radius=0.4)
        b = a + rng.uniform(-0.02, 0.02, size=a.shape)
        coarse = line_integral_sigma(dmap, a, b)
        fine = line_integral_sigma_dense(dmap, a, b, panels=30)
        assert np.max(np.abs(coarse - fine)) < 1e-10


# ---------------------------------------------------------------------------
# Morse necklace
# ---------------------------------------------------------------------------


class TestNecklace:
    def test_census_default_four_sectors(self):
        neck = build_morse_necklace(NecklaceSpec(n_sectors=4))
        census = verify_necklace_census(neck)
        assert census.counts == neck.expected_census() == (4, 4, 1)
        assert census.euler_characteristic == 1

    def test_census_multiple_beads_per_sector(self):
        neck = build_morse_necklace(NecklaceSpec(n_sectors=3, beads_per_sector=2))
        census = verify_necklace_census(neck)
        assert census.counts == neck.expected_census() == (6, 6, 1)
        assert census.euler_characteristic == 1

    def test_critical_values_match_closed_forms(self):
        spec = NecklaceSpec(n_sectors=4)
        neck = build_morse_necklace(spec)
        census = verify_necklace_census(neck)
        k_a = spec.amplitude
        r_b = neck.ring_radius
        for p in census.minima:
            assert p.value == pytest.approx(-neck.bump_depth, abs=1e-8)
        for p in census.saddles:
            assert p.value == pytest.approx(neck.bump_depth, abs=1e-10)
        (top,) = census.maxima
        assert math.hypot(*top.location) < 1e-8
        assert top.value == pytest.approx(k_a * r_b**4, abs=1e-12)

    def test_hessian_spectra_match_stiffness_formulas(self):
        spec = NecklaceSpec(n_sectors=4)
        neck = build_morse_necklace(spec)
        census = verify_necklace_census(neck)
        k_a, r_b = spec.amplitude, neck.ring_radius
        # bead minima: the cap is the angular average of the ring well, so
        # both eigenvalues equal the mean stiffness (12 + 6)/2 * k_a * r_b^2
        mean_stiff = 9.0 * k_a * r_b**2
        for p in census.minima:
            for eig in p.hessian_eigs:
                assert eig == pytest.approx(mean_stiff, rel=0.05)
        # saddles: tangential -6 k_a r_b^2, radial +4 k_a r_b^2
        for p in census.saddles:
            lo, hi = sorted(p.hessian_eigs)
            assert lo == pytest.approx(-6.0 * k_a * r_b**2, abs=1e-4)
            assert hi == pytest.approx(4.0 * k_a * r_b**2, abs=1e-4)
        # central maximum: -4 k_a r_b^2, doubly degenerate
        (top,) = census.maxima
        for eig in top.hessian_eigs:
            assert eig == pytest.approx(-4.0 * k_a * r_b**2, abs=1e-6)

    def test_minima_sit_at_bead_centers(self):
        neck = build_morse_necklace(NecklaceSpec(n_sectors=4))
        census = verify_necklace_census(neck)
        locs = np.array([p.location for p in census.minima])
        dists = np.hypot(
            locs[:, None, 0] - neck.bead_centers[None, :, 0],
            locs[:, None, 1] - neck.bead_centers[None, :, 1],
        )
        assert np.max(dists.min(axis=1)) < 1e-8

    def test_gradient_matches_finite_differences(self):
        neck = build_morse_necklace(NecklaceSpec(n_sectors=4))
        rng = np.random.default_rng(17)
        pts = disc_points(rng, 300, radius=0.9)
        # include points inside the bead blend region
        pts = np.concatenate([pts, neck.bead_centers + np.array([0.004, 0.007])])
        grad = neck.gradient(pts)
        h = 1e-6
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (neck(pts + e) - neck(pts - e)) / (2 * h)
            assert np.max(np.abs(fd - grad[:, k])) < 5e-6

    def test_explicit_bead_sites_accepted(self):
        angles = 0.3 + TWO_PI * np.arange(4) / 4
        sites = tuple((0.3, float(a)) for a in angles)
        neck = build_morse_necklace(NecklaceSpec(n_sectors=4, bead_sites=sites))
        assert np.allclose(neck.bead_angles, angles)

    def test_rejects_wrong_site_count(self):
        with pytest.raises(InvalidNecklaceTopology):
            build_morse_necklace(
                NecklaceSpec(n_sectors=4, bead_sites=((0.3, 0.0), (0.3, math.pi)))
            )

    def test_rejects_sites_off_common_circle(self):
        sites = ((0.3, 0.0), (0.31, math.pi / 2), (0.3, math.pi), (0.3, 3 * math.pi / 2))
        with pytest.raises(InvalidNecklaceTopology):
            build_morse_necklace(NecklaceSpec(n_sectors=4, bead_sites=sites))

    def test_rejects_unequal_angular_spacing(self):
        sites = ((0.3, 0.0), (0.3, 1.2), (0.3, math.pi), (0.3, 4.8))
        with pytest.raises(InvalidNecklaceTopology):
            build_morse_necklace(NecklaceSpec(n_sectors=4, bead_sites=sites))

    def test_rejects_empty_topology(self):
        with pytest.raises(InvalidNecklaceTopology):
            build_morse_necklace(NecklaceSpec(n_sectors=0))

    def test_rejects_default_width_for_two_sites(self):
        # auto ring width 3 r_b / m only fits for m >= 4
        with pytest.raises(InvalidNecklaceTopology):
            build_morse_necklace(NecklaceSpec(n_sectors=2))

    def test_rejects_nonpositive_collar(self):
        with pytest.raises(BeadOverlap):
            build_morse_necklace(NecklaceSpec(n_sectors=4, collar_width=0.0))

    def test_rejects_crowded_beads(self):
        with pytest.raises(BeadOverlap):
            build_morse_necklace(NecklaceSpec(n_sectors=4, bead_radius=0.2))


# ---------------------------------------------------------------------------
# Plug construction and contract
# ---------------------------------------------------------------------------


class TestBuildPlugValidation:
    def test_rejects_single_sector(self):
        with pytest.raises(InvalidGeometry):
            build_plug(PlugSpec(n=1))

    def test_rejects_bad_margin(self):
        with pytest.raises(InvalidGeometry):
            build_plug(PlugSpec(n=4, margin=1.2))

    def test_rejects_core_outside_identity_annulus(self):
        with pytest.raises(InvalidGeometry):
            build_plug(PlugSpec(n=4, core_radius=0.95))

    def test_rejects_bad_bead_ramp_fractions(self):
        with pytest.raises(InvalidGeometry):
            build_plug(PlugSpec(n=4, bead_ramp_inner=0.9, bead_ramp_outer=0.5))

    def test_rejects_ring_well_reaching_core(self):
        with pytest.raises(InvalidGeometry):
            build_plug(PlugSpec(n=4, ring_radius=0.5))

    def test_rejects_bead_support_reaching_core(self):
        with pytest.raises(BeadOutsideSector):
            build_plug(
                PlugSpec(n=4, core_radius=0.42, ring_width=0.1, bead_radius=0.14)
            )


class TestPlug:
    def test_boundary_identity_is_bit_exact(self, plug4):
        rng = np.random.default_rng(18)
        t = rng.uniform(0.0, TWO_PI, 300)
        r = rng.uniform(plug4.outer_radius, 1.0, 300)
        pts = np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)
        assert np.array_equal(plug4.phi(pts), pts)

    def test_tau_equals_boundary_value_on_identity_annulus(self, plug4):
        t = np.linspace(0.0, TWO_PI, 128, endpoint=False)
        pts = 0.95 * np.stack([np.cos(t), np.sin(t)], axis=-1)
        tau = plug4.tau(pts)
        assert np.max(np.abs(tau - plug4.spec.boundary_value)) < 1e-13

    def test_tau_is_positive_and_attains_boundary_minimum(self, plug4):
        assert plug4.min_tau() == pytest.approx(plug4.spec.boundary_value, abs=1e-12)

    def test_core_points_have_period_n(self, plug4):
        rng = np.random.default_rng(19)
        pts = disc_points(rng, 400, radius=plug4.core_radius * 0.98)
        beta_out = plug4.spec.bead_ramp_outer * plug4.spec.bead_radius
        keep = np.ones(len(pts), dtype=bool)
        for c in plug4.bead_centers:
            keep &= np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) > 1.05 * beta_out
        pts = pts[keep]
        back = plug4.phi_n(pts, plug4.spec.n)
        assert np.max(np.abs(back - pts)) < 1e-12

    def test_bead_cores_translate_along_necklace(self, plug4):
        beta_in = plug4.spec.bead_ramp_inner * plug4.spec.bead_radius
        offsets = 0.5 * beta_in * np.array([[1.0, 0.0], [0.0, -1.0], [0.6, 0.6]])
        for k, c in enumerate(plug4.bead_centers):
            nxt = plug4.bead_centers[(k + 1) % len(plug4.bead_centers)]
            img = plug4.phi(c + offsets)
            assert np.max(np.abs(img - (nxt + offsets))) < 1e-13

    def test_determinant_met_by_finite_differences(self, plug4):
        xs = np.linspace(-1.0, 1.0, 80)
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        pts = np.stack([gx, gy], axis=-1).reshape(-1, 2)
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0]
        jac = fd_jacobian(plug4.map, pts, h=1e-6)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        assert np.max(np.abs(det - 1.0)) < 1e-8

    def test_necklace_is_invariant_under_the_map(self, plug4):
        assert plug4.invariance_error() < 1e-8

    def test_tau_gradient_is_sigma(self, plug4):
        rng = np.random.default_rng(20)
        pts = disc_points(rng, 200, radius=0.85)
        sig = sigma_form(plug4.map, pts)
        h = 1e-5
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (plug4.tau(pts + e) - plug4.tau(pts - e)) / (2 * h)
            assert np.max(np.abs(fd - sig[:, k])) < 1e-6

    def test_center_action_matches_twist_quadrature(self, plug4):
        twist = plug4.map.atoms[-1].profile

        def integrand(t):
            return -0.5 * t * t * float(twist.dangle(np.array(t)))

        expected = plug4.spec.boundary_value + quad_with_breaks(
            integrand, 0.0, twist.outer_radius, twist.inner_radius
        )
        got = float(plug4.tau(np.zeros((1, 2)))[0])
        assert got == pytest.approx(expected, abs=1e-10)

    def test_volume_matches_radial_quadrature(self, plug4):
        twist = plug4.map.atoms[-1].profile

        def twist_term(t):
            return -0.5 * t**4 * float(twist.dangle(np.array(t)))

        oracle = math.pi * plug4.spec.boundary_value + math.pi * quad_with_breaks(
            twist_term, 0.0, twist.outer_radius, twist.inner_radius
        )
        for atom in plug4.map.atoms[:-1]:
            prof = atom.profile

            def bead_term(t, prof=prof):
                return -0.5 * t**4 * float(prof.dangle(np.array(t)))

            oracle += math.pi * quad_with_breaks(
                bead_term, 0.0, prof.outer_radius, prof.inner_radius
            )
        got = plug4.volume(n_r=2048, n_theta=64)
        assert got == pytest.approx(oracle, abs=1e-4)

    def test_volume_and_actions_scale_correctly(self, plug4):
        spec = replace(plug4.spec, scale=2.5)
        scaled = build_plug(spec)
        v1 = plug4.volume(n_r=256, n_theta=64)
        v2 = scaled.volume(n_r=256, n_theta=64)
        assert v2 == pytest.approx(6.25 * v1, rel=1e-13)
        report = find_periodic_points(scaled, k_max=1, grid=16)
        assert report.identity_action == pytest.approx(2.5, abs=1e-15)

    def test_orbit_report_structure(self, plug4, orbits4):
        assert orbits4.has_identity_annulus
        assert orbits4.identity_action == pytest.approx(1.0, abs=1e-15)
        assert orbits4.k_max == 2 * plug4.spec.n + 1
        fixed = [o for o in orbits4.orbits if o.period == 1]
        assert fixed and all(math.hypot(*o.points[0]) < 1e-6 for o in fixed)
        necklace_period = [o for o in orbits4.orbits if o.period == plug4.spec.n]
        assert necklace_period
        # the necklace-minima cycle itself is reported: one period-n orbit
        # passes through every bead center
        best = min(
            np.max(
                np.hypot(
                    o.points[:, None, 0] - plug4.bead_centers[None, :, 0],
                    o.points[:, None, 1] - plug4.bead_centers[None, :, 1],
                ).min(axis=0)
            )
            for o in necklace_period
        )
        assert best < 1e-9

    def test_orbit_actions_dominated_by_identity_annulus(self, plug4, orbits4):
        for orb in orbits4.orbits:
            assert orb.action >= orbits4.identity_action - 1e-9
        assert min_action(plug4, orbits4) == pytest.approx(1.0, abs=1e-12)
        assert orbits4.min_action == orbits4.identity_action

    def test_full_contract_passes(self, plug4):
        report = verify_plug_contract(plug4)
        assert report.passed
        assert report.failures == []
        assert report.boundary_error < 1e-13
        assert report.max_det_error < 1e-8
        assert report.min_tau > 0
        assert report.dtau_residual < 1e-6
        assert report.invariance_error < 1e-8
        assert report.min_action >= 1.0 - 1e-6
        assert report.census_counts == report.expected_census == (4, 4, 1)
        assert report.volume > 0

    def test_contract_strict_flags_nonpositive_tau(self, plug4):
        broken_spec = replace(plug4.spec, boundary_value=-1.0)
        broken = Plug(broken_spec, plug4.map, plug4.necklace)
        with pytest.raises(ContractViolation) as exc:
            verify_plug_contract(
                broken, det_grid=30, residual_grid=(24, 12), strict=True
            )
        assert exc.value.item == "positivity"
