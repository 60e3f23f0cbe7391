import math

import numpy as np
import pytest

import ovals.definitions as defs
from ovals import models
from ovals.classes import QuotientCurve, StepPolicy, StopRule
from ovals.data import RunRecord
from ovals.entropy import density_monotone, sphere_entropy
from ovals.errors import CoverageError, DegenerateGeometryError, StepRejectionError
from ovals.models import SphereModel
from ovals.radial_flow import (
    FlowSolver,
    chart_mismatch,
    curve_geometry,
    curve_velocity,
    enclosed_area,
    init_profile_ellipsoid,
    init_quarter_circle,
    init_quarter_ellipse,
    is_convex,
    needs_redistribution,
    radius_at_angles,
    redistribute,
    renormalize_curve,
    renormalize_trajectory,
    roundness,
    run_to_extinction,
    sample_charts,
    step_flow,
    tip_curvature,
    unrenormalize_curve,
    zoom_tip,
)


def test_profile_ellipsoid_intercepts(sym32):
    curve = init_profile_ellipsoid(5.0, sym32, 64)
    assert curve.tip == pytest.approx(10.0 * math.sqrt(2.0))
    assert curve.nodes[0, 1] == pytest.approx(math.sqrt(2.0))
    residual = curve.r**2 / 200.0 + curve.y**2 / 2.0 - 1.0
    assert np.max(np.abs(residual)) < 1e-12


@pytest.mark.parametrize("ell", [0.0, -1.0, float("inf")])
def test_profile_ellipsoid_rejects_bad_scale(sym32, ell):
    with pytest.raises(ValueError):
        init_profile_ellipsoid(ell, sym32, 64)


def test_profile_ellipsoid_needs_enough_nodes(sym32):
    with pytest.raises(ValueError):
        init_profile_ellipsoid(5.0, sym32, defs.MIN_NODES - 1)


def test_circle_geometry(sym32):
    curve = init_quarter_circle(2.0, sym32, 128)
    geom = curve_geometry(curve.nodes, sym32)
    np.testing.assert_allclose(geom.kappa, 0.5, rtol=1e-3)
    # S^3 of radius 2 moves with speed n / R
    np.testing.assert_allclose(curve_velocity(curve), 1.5, rtol=1e-3)
    assert tip_curvature(curve) == pytest.approx(1.5, rel=1e-3)
    assert is_convex(curve.nodes)
    assert roundness(curve) == pytest.approx(1.0, abs=1e-12)
    assert enclosed_area(curve) == pytest.approx(math.pi, rel=1e-3)


def test_step_flow_leaves_input_untouched(sym32):
    curve = init_quarter_circle(1.0, sym32, 64)
    before = curve.nodes.copy()
    advanced = step_flow(curve)
    np.testing.assert_array_equal(curve.nodes, before)
    assert advanced.t > 0.0
    assert enclosed_area(advanced) < enclosed_area(curve)


def test_sphere_follows_area_law_to_fixed_time(sym32):
    curve = init_quarter_circle(1.0, sym32, 64)
    record = FlowSolver(curve).run(StopRule(kind="time", value=0.02))
    final = record.snapshots[-1]
    assert record.status == defs.STATUS_TIME_REACHED
    assert final.t == pytest.approx(0.02)
    assert final.tip == pytest.approx(SphereModel.radius(1.0, 3, 0.02), rel=5e-3)
    assert enclosed_area(final) == pytest.approx(SphereModel.area_law(1.0, 3, 0.02), rel=1e-2)
    assert not record.convexity_lost


@pytest.mark.slow
def test_sphere_extinction_time(sym32):
    record = run_to_extinction(init_quarter_circle(1.0, sym32, 256))
    expected = SphereModel.extinction_time(1.0, 3)
    assert record.status == defs.STATUS_EXTINCT
    assert record.t_ext == pytest.approx(expected, rel=5e-3)
    assert record.roundness < 1.05
    assert density_monotone([d for d in record.densities if math.isfinite(d)])


def test_renormalize_round_trip(sym32):
    curve = init_quarter_circle(1.0, sym32, 64)
    renormalized = renormalize_curve(curve, t_ext=0.25, tau_shift=0.5)
    assert renormalized.frame == defs.FRAME_RENORMALIZED
    assert renormalized.tau == pytest.approx(math.log(4.0) + 0.5)
    assert renormalized.tip == pytest.approx(2.0)
    back = unrenormalize_curve(renormalized, t_ext=0.25)
    np.testing.assert_allclose(back.nodes, curve.nodes, atol=1e-15)
    with pytest.raises(ValueError):
        renormalize_curve(curve, t_ext=0.0)


def test_sample_charts_agree_on_overlap(sym32):
    curve = renormalize_curve(init_quarter_circle(1.0, sym32, 256), t_ext=0.25)
    samples = sample_charts(curve)
    assert samples.u[0] == pytest.approx(2.0)
    assert samples.Y[0] == pytest.approx(2.0)
    assert chart_mismatch(samples) < 1e-3


def test_zoom_tip_undefined_at_tau_zero(sym32):
    curve = renormalize_curve(init_quarter_circle(1.0, sym32, 64), t_ext=1.0)
    samples = sample_charts(curve)
    assert samples.tau == 0.0
    with pytest.raises(CoverageError):
        zoom_tip(samples)


def test_renormalize_trajectory_of_shrinking_circles(sym32):
    record = RunRecord(kind="radial-asymptotics", sym=sym32, t_ext=0.25)
    for t in (0.0, 0.125, 0.2, 0.25 - 1e-5):
        radius = math.sqrt(2.0 * sym32.n * (0.25 - t))
        circle = init_quarter_circle(radius, sym32, 256)
        record.snapshots.append(QuotientCurve(circle.nodes, t, sym32))
    samples = renormalize_trajectory(record, tau_shift=1.0)
    assert record.summary["dropped_snapshots"] == 1
    assert [p.tau for p in samples] == pytest.approx([1.0 - math.log(g) for g in (0.25, 0.125, 0.05)])
    for p in samples:
        assert p.u[0] == pytest.approx(math.sqrt(6.0), rel=1e-6)
        assert p.t_ext == 0.25
    with pytest.raises(ValueError):
        renormalize_trajectory(RunRecord(kind="radial-asymptotics", sym=sym32))


def test_zoom_tip_of_a_circle(sym32):
    samples = models.quarter_circle_samples(math.sqrt(6.0), -25.0, sym32)
    zoom = zoom_tip(samples, s_max=5.0)
    expected = 5.0 * (np.sqrt(6.0 - zoom.s**2 / 25.0) - math.sqrt(6.0))
    np.testing.assert_allclose(zoom.Z, expected, atol=1e-3)
    assert zoom.tau == -25.0


def test_radius_at_angles_on_a_circle(sym32):
    curve = init_quarter_circle(2.0, sym32, 128)
    angles = np.linspace(0.0, 0.5 * math.pi, 9)
    np.testing.assert_allclose(radius_at_angles(curve, angles), 2.0, rtol=1e-3)


def test_nested_curves_stay_nested(sym32):
    stop = StopRule(kind="time", value=0.04)
    inner = FlowSolver(init_quarter_ellipse(1.0, 0.6, sym32, 64)).run(stop).snapshots[-1]
    outer = FlowSolver(init_quarter_circle(1.2, sym32, 64)).run(stop).snapshots[-1]
    angles = np.linspace(0.0, 0.5 * math.pi, 33)
    assert np.all(radius_at_angles(inner, angles) < radius_at_angles(outer, angles))


def test_flow_keeps_the_diagonal_symmetry(sym32):
    # k - 1 = n - k, so reflection across r = y maps solutions to solutions
    solver = FlowSolver(init_quarter_circle(1.0, sym32, 64))
    for _ in range(50):
        solver.step()
    nodes = solver.curve.nodes
    np.testing.assert_allclose(nodes[:, 0], nodes[::-1, 1], atol=1e-10)


def test_sphere_radius_converges_with_resolution(sym32):
    errors = []
    for m in (32, 64, 128):
        record = FlowSolver(init_quarter_circle(1.0, sym32, m)).run(StopRule(kind="time", value=0.05))
        errors.append(abs(record.snapshots[-1].tip - SphereModel.radius(1.0, 3, 0.05)))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 1.8), errors


def test_rejection_limit_counts_attempts(sym32):
    solver = FlowSolver(init_quarter_circle(1.0, sym32, 64), StepPolicy(max_rejections=3))

    def degenerate(dt):
        raise DegenerateGeometryError("consecutive nodes coincide")

    solver._heun = degenerate
    with pytest.raises(StepRejectionError, match="3 rejections"):
        solver.step()
    assert solver.rejections == 3


def test_redistribution_spaces_nodes_uniformly(sym32):
    theta = 0.5 * math.pi * np.linspace(0.0, 1.0, 64) ** 2
    nodes = np.column_stack((np.sin(theta), np.cos(theta)))
    nodes[-1, 1] = 0.0
    policy = StepPolicy()
    assert needs_redistribution(nodes, sym32, policy)
    spread = redistribute(nodes, sym32, policy)
    spacing = np.hypot(*np.diff(spread, axis=0).T)
    assert spacing.max() < 1.05 * spacing.min()
    assert not needs_redistribution(spread, sym32, policy)
    assert tuple(spread[0]) == (0.0, 1.0)
    assert tuple(spread[-1]) == (1.0, 0.0)


@pytest.mark.slow
def test_long_ellipsoid_passes_through_the_cylinder(sym32):
    record = run_to_extinction(init_profile_ellipsoid(8.0, sym32, 256))
    assert record.status == defs.STATUS_EXTINCT
    assert 0.9 < record.t_ext < 1.005
    densities = [d for d in record.densities if math.isfinite(d)]
    assert density_monotone(densities)
    assert any(sphere_entropy(2) < d < sphere_entropy(1) for d in densities)
    # the center follows the shrinking R^2 x S^1 cylinder early on
    for snap in record.snapshots:
        if snap.t <= 0.5:
            assert snap.nodes[0, 1] == pytest.approx(math.sqrt(2.0 * (1.0 - snap.t)), rel=0.02)
