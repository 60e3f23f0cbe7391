import math

import numpy as np
import pytest

from ovals.classes import (
    EllipsoidParams,
    NormalizedRun,
    QuotientCurve,
    RadialSurface,
    StopRule,
    SymmetryClass,
)
from ovals.radial_flow import init_quarter_circle


def test_symmetry_class_derived_quantities(sym32):
    assert sym32.d == 2
    assert sym32.fiber == 1
    assert sym32.cylinder_radius == pytest.approx(math.sqrt(2.0))
    assert SymmetryClass(4, 2).cylinder_radius == pytest.approx(2.0)


@pytest.mark.parametrize("n,k", [(3, 3), (3, 0), (2, 2)])
def test_symmetry_class_rejects_degenerate_pairs(n, k):
    with pytest.raises(ValueError):
        SymmetryClass(n, k)


def test_quotient_curve_endpoints_must_lie_on_axes(sym32):
    curve = init_quarter_circle(1.0, sym32, 32)
    nodes = curve.nodes.copy()
    nodes[0, 0] = 0.1
    with pytest.raises(ValueError):
        QuotientCurve(nodes, 0.0, sym32)


def test_quotient_curve_rejects_too_few_nodes(sym32):
    nodes = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(ValueError):
        QuotientCurve(nodes, 0.0, sym32)


def test_quotient_curve_rejects_unknown_frame(sym32):
    curve = init_quarter_circle(1.0, sym32, 32)
    with pytest.raises(ValueError):
        QuotientCurve(curve.nodes, 0.0, sym32, frame="rotated")


def test_frozen_curve_is_read_only(sym32):
    frozen = init_quarter_circle(1.0, sym32, 32).frozen()
    with pytest.raises(ValueError):
        frozen.nodes[1, 0] = 2.0


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(kind="time")
    with pytest.raises(ValueError):
        StopRule(kind="density", value=1.2)
    with pytest.raises(ValueError):
        StopRule(kind="forever")
    assert StopRule(kind="density", value=1.2, t0=1.0).t0 == 1.0


def test_ellipsoid_params_clamp():
    params = EllipsoidParams(16.0, 0.01)
    assert params.a == (0.05, 0.95)
    assert EllipsoidParams(16.0, 0.3).a1 == 0.3
    with pytest.raises(ValueError):
        EllipsoidParams(0.0, 0.5)


def test_radial_surface_needs_two_long_directions():
    with pytest.raises(ValueError):
        RadialSurface(np.ones((3, 16, 16)), 0.0, SymmetryClass(3, 1))
    with pytest.raises(ValueError):
        RadialSurface(np.ones((3, 16, 8)), 0.0, SymmetryClass(3, 2))
    with pytest.raises(ValueError):
        RadialSurface(np.ones((3, 16, 16)), 0.0, SymmetryClass(3, 2), scale=(1.0, 0.0, 1.0))


def test_normalized_run():
    run = NormalizedRun(t_ext=2.0, t_prime=1.0, lam=1.0, widths=(1.0, 2.0))
    assert run.tau_shift == pytest.approx(0.0)
    with pytest.raises(ValueError):
        NormalizedRun(t_ext=1.0, t_prime=1.0, lam=1.0, widths=(1.0, 2.0))
    with pytest.raises(ValueError):
        NormalizedRun(t_ext=2.0, t_prime=1.0, lam=1.0, widths=(0.0, 2.0))
