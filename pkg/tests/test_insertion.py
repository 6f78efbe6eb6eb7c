"""Insertion layer: exact certification ledger, equal-area embeddings,
and the annulus extension of the invariant Morse function."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lutzplug.discmap import fd_jacobian
from lutzplug.errors import (
    EpsilonTooLarge,
    GeometryInfeasible,
    InvalidGeometry,
    PlugContractUnmet,
)
from lutzplug.insertion import (
    AnnulusMorse,
    AnnulusMorseSpec,
    CertifiedBound,
    EllipseEmbedding,
    StarEmbedding,
    StraightPieceSummary,
    TubeAtlas,
    build_equal_area_embedding,
    certify_insertion,
    check_outward_monotonicity,
    collar_sample,
    disc_radius_for,
    extend_annulus_morse,
    insert_plug,
    plan_parameters,
    pullback_primitive,
    tmin_bound,
    verify_annulus_census,
    verify_embedding,
    volume_bound,
)
from lutzplug.plug import PlugSpec, build_plug

TWO_PI = 2.0 * math.pi


def frozen_atlas() -> TubeAtlas:
    return TubeAtlas(
        alpha_tmin=Fraction(1),
        pieces=(StraightPieceSummary(Fraction(1), Fraction(1), Fraction(0)),),
        opaque=Fraction(1, 25),
    )


@pytest.fixture(scope="module")
def necklace4():
    return build_plug(PlugSpec(n=4)).necklace


@pytest.fixture(scope="module")
def annulus4(necklace4):
    return extend_annulus_morse(necklace4)


@pytest.fixture(scope="module")
def census4(annulus4):
    return verify_annulus_census(annulus4)


class TestLedger:
    def test_frozen_atlas_planner_numbers(self):
        atlas = frozen_atlas()
        eps, delta = plan_parameters(atlas, 10)
        assert eps == Fraction(1, 160)
        assert delta == Fraction(1, 960)

    def test_frozen_atlas_certified_bound(self):
        bound = certify_insertion(frozen_atlas(), target_ratio=10)
        assert bound.epsilon == Fraction(1, 160)
        assert bound.delta == Fraction(1, 960)
        assert bound.tmin_bound == Fraction(159, 160)
        assert bound.volume_bound == Fraction(3, 320)
        assert bound.ratio == Fraction(25281, 240)
        assert float(bound.ratio) == pytest.approx(105.3375, abs=1e-12)
        assert bound.meets_target

    def test_volume_bound_below_twice_epsilon(self):
        bound = certify_insertion(frozen_atlas(), target_ratio=10)
        assert bound.volume_bound < 2 * bound.epsilon
        # planner always lands at exactly three halves of epsilon
        assert bound.volume_bound == Fraction(3, 2) * bound.epsilon

    @pytest.mark.parametrize("target", [10**3, 10**6])
    def test_planner_guarantee_large_targets(self, target):
        bound = certify_insertion(frozen_atlas(), target_ratio=target)
        assert bound.meets_target
        assert bound.ratio >= target
        # exact arithmetic: the ratio is a Fraction, not a float estimate
        assert isinstance(bound.ratio, Fraction)

    def test_small_target_uses_half_period_cap(self):
        atlas = frozen_atlas()
        eps, _ = plan_parameters(atlas, Fraction(1, 100))
        assert eps == Fraction(1, 2)  # T/2 governs below T^2/(16 C)
        bound = certify_insertion(atlas, target_ratio=Fraction(1, 100))
        assert bound.ratio == Fraction(1, 3)
        assert bound.meets_target

    def test_explicit_allowances(self):
        atlas = frozen_atlas()
        bound = certify_insertion(
            atlas, epsilon=Fraction(1, 100), delta=Fraction(1, 1000)
        )
        weight = Fraction(3)  # 2ab + 1 for the single (1, 1) piece
        assert bound.volume_bound == Fraction(1, 100) + weight * Fraction(1, 1000)
        assert bound.tmin_bound == Fraction(99, 100)
        assert bound.ratio == bound.tmin_bound**2 / bound.volume_bound
        assert bound.target is None and not bound.meets_target

    def test_multi_piece_budget_weight(self):
        atlas = TubeAtlas(
            alpha_tmin=Fraction(2),
            pieces=(
                StraightPieceSummary(1, 1, 0),
                StraightPieceSummary(2, 3, 1),
            ),
        )
        assert atlas.budget_weight == Fraction(16)  # (2+1) + (12+1)
        eps, delta = plan_parameters(atlas, 10)
        assert delta == eps / 32
        assert volume_bound(atlas, eps, delta) == Fraction(3, 2) * eps

    def test_opaque_field_is_inert(self):
        base = frozen_atlas()
        plain = TubeAtlas(alpha_tmin=base.alpha_tmin, pieces=base.pieces)
        for target in (10, 10**3):
            a = certify_insertion(base, target_ratio=target)
            b = certify_insertion(plain, target_ratio=target)
            assert (a.epsilon, a.delta, a.ratio) == (b.epsilon, b.delta, b.ratio)
        assert base.opaque == Fraction(1, 25)

    def test_epsilon_too_large(self):
        atlas = frozen_atlas()
        with pytest.raises(EpsilonTooLarge):
            tmin_bound(atlas, Fraction(1))
        with pytest.raises(EpsilonTooLarge):
            certify_insertion(atlas, epsilon=Fraction(2), delta=Fraction(1, 10))

    def test_validation_errors(self):
        with pytest.raises(InvalidGeometry):
            StraightPieceSummary(0, 1, 0)
        with pytest.raises(InvalidGeometry):
            StraightPieceSummary(1, -1, 0)
        with pytest.raises(InvalidGeometry):
            TubeAtlas(alpha_tmin=Fraction(0), pieces=(StraightPieceSummary(1, 1),))
        with pytest.raises(InvalidGeometry):
            TubeAtlas(alpha_tmin=Fraction(1), pieces=())
        with pytest.raises(InvalidGeometry):
            plan_parameters(frozen_atlas(), 0)
        with pytest.raises(InvalidGeometry):
            certify_insertion(frozen_atlas())
        with pytest.raises(InvalidGeometry):
            volume_bound(frozen_atlas(), Fraction(0), Fraction(1, 10))

    @given(
        a=st.integers(1, 20),
        b=st.integers(1, 20),
        tnum=st.integers(1, 40),
        tden=st.integers(1, 8),
        cnum=st.integers(1, 10**6),
    )
    @settings(max_examples=60, deadline=None)
    def test_planner_guarantee_property(self, a, b, tnum, tden, cnum):
        atlas = TubeAtlas(
            alpha_tmin=Fraction(tnum, tden),
            pieces=(StraightPieceSummary(a, b),),
        )
        target = Fraction(cnum, 7)
        bound = certify_insertion(atlas, target_ratio=target)
        assert bound.meets_target
        assert bound.volume_bound == Fraction(3, 2) * bound.epsilon
        assert bound.tmin_bound >= atlas.alpha_tmin / 2


class TestEmbeddings:
    def test_dispatch_by_delta(self):
        assert isinstance(build_equal_area_embedding(1.0, 0.5), EllipseEmbedding)
        assert isinstance(build_equal_area_embedding(1.0, 0.1), StarEmbedding)
        assert isinstance(build_equal_area_embedding(1.0, 0.05), StarEmbedding)
        forced = build_equal_area_embedding(1.0, 0.5, kind="star")
        assert isinstance(forced, StarEmbedding)

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidGeometry):
            build_equal_area_embedding(1.0, 0.5, kind="pentagon")

    def test_ellipse_infeasible_for_small_delta(self):
        with pytest.raises(GeometryInfeasible):
            build_equal_area_embedding(1.0, 0.1, kind="ellipse")

    def test_star_infeasible_for_huge_margin(self):
        with pytest.raises(GeometryInfeasible):
            build_equal_area_embedding(1.0, 0.05, kind="star", star_margin=0.45)

    def test_disc_radius_validation(self):
        with pytest.raises(InvalidGeometry):
            disc_radius_for(1.0, 0.0)
        with pytest.raises(InvalidGeometry):
            disc_radius_for(1.0, 1.0)
        with pytest.raises(InvalidGeometry):
            disc_radius_for(-1.0, 0.5)

    @pytest.mark.parametrize("delta", [0.5, 0.1, 0.05])
    def test_area_identity_exact(self, delta):
        emb = build_equal_area_embedding(1.0, delta)
        area = math.pi * emb.disc_radius**2
        target = 2.0 * (1.0 - delta)
        assert abs(area - target) <= 1e-15 * target

    @pytest.mark.parametrize("delta", [0.5, 0.1, 0.05])
    def test_verify_embedding_passes(self, delta):
        emb = build_equal_area_embedding(1.0, delta)
        report = verify_embedding(emb)
        assert report.passed
        assert report.area_error <= 1e-15
        assert report.max_density_error <= 1e-12
        assert report.max_density_error_fd <= 1e-6
        assert report.boundary_margin > 0.005

    def test_ellipse_density_is_exactly_one(self):
        emb = build_equal_area_embedding(1.0, 0.5)
        rng = np.random.default_rng(0)
        pts = emb.disc_radius * rng.uniform(-0.7, 0.7, (200, 2))
        assert np.max(np.abs(emb.density(pts) - 1.0)) < 1e-14

    def test_ellipse_center_and_axes(self):
        emb = build_equal_area_embedding(1.0, 0.5)
        center = emb.map(np.zeros((1, 2)))[0]
        assert center[0] == pytest.approx(0.0, abs=1e-15)
        assert center[1] == pytest.approx(0.5, abs=1e-15)
        # image semi-axes enclose exactly the target euclidean area
        assert math.pi * emb.semi_axis_r * emb.semi_axis_x == pytest.approx(
            1.0, rel=1e-14
        )

    def test_star_density_unit_with_other_chart_slope(self):
        emb = build_equal_area_embedding(2.0, 0.1)
        report = verify_embedding(emb)
        assert report.passed

    def test_star_rearrangement_is_inverse(self):
        emb = build_equal_area_embedding(1.0, 0.05)
        theta = np.linspace(0.0, TWO_PI, 700, endpoint=False)
        big = emb.rearranged_angle(theta)
        assert np.max(np.abs(emb.cumulative(big) - theta)) < 1e-11
        # strictly monotone, and the full turn maps to the full turn
        assert np.all(np.diff(big) > 0)
        assert emb.cumulative(np.array([TWO_PI]))[0] == pytest.approx(
            TWO_PI, rel=1e-13
        )

    def test_star_boundary_strictly_inside_chart(self):
        for delta in (0.1, 0.05):
            emb = build_equal_area_embedding(1.0, delta)
            edge = emb.boundary(4096)
            assert np.max(np.abs(edge[:, 0])) < 1.0
            assert np.max(np.abs(edge[:, 1] - 0.5)) < 0.5
            assert np.min(emb.radius(np.linspace(0, TWO_PI, 4096))) > 0.3

    def test_star_jacobian_matches_finite_differences(self):
        emb = build_equal_area_embedding(1.0, 0.1)
        rng = np.random.default_rng(3)
        radii = emb.disc_radius * rng.uniform(0.05, 0.98, 120)
        angs = rng.uniform(-math.pi, math.pi, 120)
        pts = np.stack([radii * np.cos(angs), radii * np.sin(angs)], axis=-1)
        jac = emb.jacobian(pts)
        jac_fd = fd_jacobian(emb.map, pts, h=1e-5)
        assert np.max(np.abs(jac - jac_fd)) < 1e-6

    @pytest.mark.parametrize("delta", [0.5, 0.1])
    def test_pullback_primitive_exterior_derivative(self, delta):
        emb = build_equal_area_embedding(1.0, delta)
        lam = pullback_primitive(emb, 1.0, 0.0)
        rng = np.random.default_rng(5)
        radii = emb.disc_radius * rng.uniform(0.05, 0.95, 150)
        angs = rng.uniform(-math.pi, math.pi, 150)
        pts = np.stack([radii * np.cos(angs), radii * np.sin(angs)], axis=-1)
        h = 3e-6
        ex, ey = np.array([h, 0.0]), np.array([0.0, h])
        curl = (lam(pts + ex)[:, 1] - lam(pts - ex)[:, 1]) / (2 * h) - (
            lam(pts + ey)[:, 0] - lam(pts - ey)[:, 0]
        ) / (2 * h)
        assert np.max(np.abs(curl + 1.0)) < 1e-5

    @pytest.mark.parametrize("delta", [0.5, 0.1])
    def test_pullback_primitive_stokes(self, delta):
        emb = build_equal_area_embedding(1.0, delta)
        lam = pullback_primitive(emb, 1.0, 0.0)
        n = 8192
        t = (np.arange(n) + 0.5) * (TWO_PI / n)
        rho = emb.disc_radius
        pts = rho * np.stack([np.cos(t), np.sin(t)], axis=-1)
        tangent = rho * np.stack([-np.sin(t), np.cos(t)], axis=-1)
        integral = float(np.sum(np.sum(lam(pts) * tangent, axis=-1))) * (TWO_PI / n)
        assert integral == pytest.approx(-math.pi * rho**2, rel=2e-5)


class TestAnnulusMorse:
    def test_census_counts(self, annulus4, census4):
        assert census4.counts == annulus4.expected_census() == (4, 5, 1)
        assert census4.euler_characteristic == 0

    def test_neck_saddle_location_and_value(self, annulus4, census4):
        neck = [
            p
            for p in census4.saddles
            if abs(p.location[0]) < 1e-6
            and min(p.location[1], 1.0 - p.location[1]) < 1e-6
        ]
        assert len(neck) == 1
        spec = annulus4.spec
        k2 = annulus4.saddle_level**2
        c2 = spec.seam_level**2
        t = k2 - c2
        phi_lin = annulus4.seam_slope / (2.0 * c2)
        expected = annulus4.seam_value + phi_lin * t + spec.growth * t * t
        assert neck[0].value == pytest.approx(expected, rel=1e-9)

    def test_neck_saddle_hessian(self, annulus4, census4):
        neck = [p for p in census4.saddles if abs(p.location[0]) < 1e-6][0]
        spec = annulus4.spec
        t = annulus4.saddle_level**2 - spec.seam_level**2
        dphi = annulus4.seam_slope / (2.0 * spec.seam_level**2) + 2 * spec.growth * t
        expect_r = dphi * 2.0 / spec.gauge_halfwidth**2
        expect_x = -dphi * 2.0 / spec.gauge_halfheight**2
        eigs = sorted(neck.hessian_eigs)
        assert eigs[0] == pytest.approx(expect_x, rel=1e-3)
        assert eigs[1] == pytest.approx(expect_r, rel=1e-3)

    def test_disc_criticals_survive_in_chart(self, annulus4, census4, necklace4):
        mapped = annulus4.chart_coords(necklace4.bead_centers)
        minima = np.array([p.location for p in census4.minima])
        for target in mapped:
            dist = np.min(np.hypot(*(minima - target).T))
            assert dist < 1e-6
        for p in census4.minima:
            assert p.value == pytest.approx(-necklace4.bump_depth, abs=1e-9)

    def test_chart_disc_round_trip(self, annulus4):
        rng = np.random.default_rng(7)
        radii = rng.uniform(0.0, 0.999, 300)
        angs = rng.uniform(0.0, TWO_PI, 300)
        disc = np.stack([radii * np.cos(angs), radii * np.sin(angs)], axis=-1)
        back = annulus4.disc_coords(annulus4.chart_coords(disc))
        assert np.max(np.abs(back - disc)) < 1e-12
        chart = annulus4.chart_coords(disc)
        again = annulus4.chart_coords(annulus4.disc_coords(chart))
        assert np.max(np.abs(again - chart)) < 1e-12

    def test_gauge_on_seam_images(self, annulus4):
        t = np.linspace(0.0, TWO_PI, 64, endpoint=False)
        for s in (0.25, 0.8, 1.0):
            circle = s * np.stack([np.cos(t), np.sin(t)], axis=-1)
            g = np.sqrt(annulus4.gauge_sq(annulus4.chart_coords(circle)))
            assert np.max(np.abs(g - s * annulus4.spec.seam_level)) < 1e-13

    def test_seam_is_c1(self, annulus4):
        t = np.linspace(0.0, TWO_PI, 96, endpoint=False)
        circle = np.stack([np.cos(t), np.sin(t)], axis=-1)
        inner = annulus4.chart_coords((1.0 - 1e-9) * circle)
        outer = annulus4.chart_coords((1.0 + 1e-9) * circle)
        assert np.max(np.abs(annulus4(inner) - annulus4(outer))) < 1e-7
        grad_gap = annulus4.gradient(inner) - annulus4.gradient(outer)
        assert np.max(np.abs(grad_gap)) < 1e-6

    def test_gradient_matches_finite_differences(self, annulus4):
        rng = np.random.default_rng(11)
        pts = np.stack(
            [rng.uniform(-0.95, 0.95, 400), rng.uniform(0.0, 1.0, 400)], axis=-1
        )
        # keep a small moat around the C^1 seam where FD of the value is
        # only first-order accurate
        g = np.sqrt(annulus4.gauge_sq(pts))
        pts = pts[np.abs(g - annulus4.spec.seam_level) > 0.01]
        grad = annulus4.gradient(pts)
        h = 1e-6
        fd = np.empty_like(grad)
        for axis, offset in enumerate((np.array([h, 0.0]), np.array([0.0, h]))):
            fd[:, axis] = (annulus4(pts + offset) - annulus4(pts - offset)) / (2 * h)
        assert np.max(np.abs(grad - fd)) < 5e-6

    def test_periodic_in_x2(self, annulus4):
        rng = np.random.default_rng(13)
        pts = np.stack(
            [rng.uniform(-0.99, 0.99, 300), rng.uniform(0.0, 1.0, 300)], axis=-1
        )
        shifted = pts + np.array([0.0, 1.0])
        assert np.max(np.abs(annulus4(pts) - annulus4(shifted))) < 1e-12
        assert np.max(np.abs(annulus4.gradient(pts) - annulus4.gradient(shifted))) < 1e-12

    def test_outward_monotonicity(self, annulus4):
        slope = check_outward_monotonicity(annulus4, n_points=1000, seed=0)
        assert slope > 0.0
        pts = collar_sample(annulus4, 1000, seed=0)
        assert len(pts) == 1000
        assert np.all(np.sqrt(annulus4.gauge_sq(pts)) > annulus4.spec.seam_level)
        outward = annulus4.outward_radial_derivative(pts)
        assert np.all(outward > 0.0)

    def test_asymmetric_necklace_census(self):
        plug = build_plug(PlugSpec(n=5, bead_phase=0.37))
        annulus = extend_annulus_morse(plug.necklace)
        census = verify_annulus_census(annulus)
        assert census.counts == (5, 6, 1)
        assert census.euler_characteristic == 0

    def test_spec_validation(self, necklace4):
        with pytest.raises(InvalidGeometry):
            AnnulusMorse(necklace4, AnnulusMorseSpec(gauge_halfheight=0.25))
        with pytest.raises(InvalidGeometry):
            AnnulusMorse(necklace4, AnnulusMorseSpec(seam_level=0.9))
        with pytest.raises(InvalidGeometry):
            AnnulusMorse(necklace4, AnnulusMorseSpec(seam_level=0.0))
        with pytest.raises(InvalidGeometry):
            AnnulusMorse(necklace4, AnnulusMorseSpec(gauge_halfwidth=1.2))
        with pytest.raises(InvalidGeometry):
            AnnulusMorse(necklace4, AnnulusMorseSpec(growth=-1.0))

    def test_seam_curve_closes_inside_chart(self, annulus4):
        curve = annulus4.seam_curve(512)
        assert np.max(np.abs(curve[:, 0])) < 1.0
        assert np.allclose(curve[0], curve[-1], atol=1e-12)


@pytest.fixture(scope="module")
def demo():
    return insert_plug(
        frozen_atlas(),
        target_ratio=10,
        demo_delta=0.5,
        plug_spec=PlugSpec(n=4),
        run_contract=True,
        strict_plug=True,
    )


class TestInsertionDemo:
    def test_certified_bound_travels_with_demo(self, demo):
        assert demo.bound.ratio == Fraction(25281, 240)
        assert demo.bound.meets_target

    def test_embedding_and_scale(self, demo):
        assert demo.embedding_report.passed
        assert demo.plug.spec.scale == pytest.approx(
            demo.embedding.disc_radius, abs=0.0
        )

    def test_plug_contract(self, demo):
        assert demo.contract is not None
        assert demo.contract.passed, demo.contract.failures

    def test_annulus_extension(self, demo):
        assert demo.annulus_census_ok
        assert demo.annulus_census.counts == (4, 5, 1)
        assert demo.outward_min_slope > 0.0

    def test_budget(self, demo):
        assert demo.budget.budget == pytest.approx(1.5, abs=1e-12)
        assert demo.budget.demo_volume == pytest.approx(
            demo.plug.volume(), abs=0.0
        )
        assert demo.budget.satisfied

    def test_strict_budget_violation_raises(self):
        with pytest.raises(PlugContractUnmet):
            insert_plug(
                frozen_atlas(),
                target_ratio=10,
                demo_delta=0.05,
                run_contract=False,
                strict_plug=True,
            )

    def test_explicit_allowances_pass_through(self):
        demo = insert_plug(
            frozen_atlas(),
            epsilon=Fraction(1, 100),
            delta=Fraction(1, 1000),
            run_contract=False,
        )
        assert isinstance(demo.bound, CertifiedBound)
        assert demo.bound.epsilon == Fraction(1, 100)
        assert demo.contract is None
