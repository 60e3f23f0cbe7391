import math

import numpy as np
import pytest

from ovals.classes import SymmetryClass
from ovals.errors import CoverageError
from ovals.solitons import (
    LEAF_COMPACT,
    LEAF_CYLINDER,
    LEAF_TAIL,
    FoliationLeaf,
    bowl_solve,
    foliation_divergence,
    leaf_samples,
    leaves_nested,
    make_leaf,
    shrinker_bound_margin,
    shrinker_shoot,
    sign_report,
    tail_shrinker_shoot,
    translator_residual,
)

# shifted leaves are compared to 0 with this slack; the divergence vanishes at y1 = 2(k-1)/eta
SIGN_SLACK = 1e-10


@pytest.fixture(scope="module")
def shrinker10():
    return shrinker_shoot(10.0, 3)


def test_shrinker_reaches_axis_near_cylinder(shrinker10):
    cylinder = math.sqrt(2.0 * (3 - 1))
    # concavity at the axis, u''(0) = (d-1)/u0 - u0/2 < 0, puts u0 above the cylinder;
    # the outer profile u^2 = 2(d-1)(1 - y^2/a^2) sets the excess near 1/a^2
    assert cylinder < shrinker10.u0 < cylinder * (1.0 + 2.0 / 10.0**2)
    assert shrinker10.u_at(10.0)[0] == pytest.approx(0.0, abs=1e-12)


def test_shrinker_profile_columns_run_axis_to_tip(shrinker10):
    columns = shrinker10.columns()
    assert columns["y"][0] == 0.0
    assert columns["y"][-1] == pytest.approx(10.0)
    assert columns["value"][-1] == 0.0
    assert np.all(np.diff(columns["y"]) > 0.0)


def test_shrinker_upper_bound(shrinker10):
    assert shrinker_bound_margin(shrinker10) >= 0.0


def test_shrinker_domain(shrinker10):
    with pytest.raises(CoverageError):
        shrinker10.u_at(10.5)
    with pytest.raises(ValueError):
        shrinker_shoot(1.0, 3)
    with pytest.raises(ValueError):
        shrinker_shoot(10.0, 1)


def test_shrinkers_are_nested(shrinker10):
    assert leaves_nested([shrinker10, shrinker_shoot(6.0, 3)])


def test_tail_shrinker_is_asymptotically_conical():
    tail = tail_shrinker_shoot(0.5, 2, r_max=200.0)
    assert tail.r_max == 200.0
    assert abs(tail.du[-1] - 0.5) <= 0.02 * 0.5
    assert tail.u_at(200.0)[0] == pytest.approx(100.0 + 1.0 / 100.0, rel=1e-12)
    assert np.all(tail.u > 0.0)
    assert tail.second_derivative()[tail.y >= 1.0].min() > -1e-6


@pytest.mark.parametrize("b,r_max", [(0.0, 200.0), (1.5, 200.0), (0.5, 10.0)])
def test_tail_shrinker_rejects_bad_input(b, r_max):
    with pytest.raises(ValueError):
        tail_shrinker_shoot(b, 2, r_max=r_max)


@pytest.mark.parametrize("d", [2, 3])
def test_bowl_curvature_at_origin(d):
    bowl = bowl_solve(d, speed=math.sqrt(2.0) / 2.0, s_max=10.0)
    assert bowl.series_curvature == pytest.approx(-math.sqrt(2.0) / (2.0 * d))
    assert abs(bowl.curvature_at_origin() - bowl.series_curvature) <= 1e-6
    assert translator_residual(bowl) <= 1e-6
    assert bowl.s_max == pytest.approx(10.0)
    assert np.all(np.diff(bowl.Z) < 0.0)


def test_bowl_rejects_bad_input():
    with pytest.raises(ValueError):
        bowl_solve(1)
    with pytest.raises(ValueError):
        bowl_solve(2, speed=0.0)
    with pytest.raises(CoverageError):
        bowl_solve(2, s_max=5.0).Z_at(np.array([6.0]))


def test_compact_leaf_divergence_is_nonpositive(sym32):
    leaf = make_leaf(LEAF_COMPACT, 1.0, sym32, 10.0)
    y1 = leaf_samples(leaf, 101)
    assert y1[0] == pytest.approx(2.0)
    assert y1[-1] == pytest.approx(11.0)
    assert np.all(foliation_divergence(leaf, y1) <= SIGN_SLACK)


def test_tail_leaf_divergence_is_nonnegative(sym32):
    leaf = make_leaf(LEAF_TAIL, 1.0, sym32, 0.5)
    values = foliation_divergence(leaf, leaf_samples(leaf, 101))
    assert np.all(values >= -SIGN_SLACK)


def test_divergence_vanishes_at_the_threshold(sym32):
    leaf = make_leaf(LEAF_COMPACT, 1.0, sym32, 10.0)
    assert leaf.y1_min == pytest.approx(2.0)
    assert foliation_divergence(leaf, [2.0])[0] == pytest.approx(0.0, abs=SIGN_SLACK)


@pytest.mark.parametrize("n,k", [(3, 2), (4, 2), (4, 3)])
def test_cylinder_leaf_is_a_shrinker(n, k):
    leaf = make_leaf(LEAF_CYLINDER, 1.0, SymmetryClass(n, k))
    report = sign_report(leaf, leaf_samples(leaf, 11))
    np.testing.assert_allclose(report["value"], 0.0, atol=1e-12)
    assert np.all(report["sign"] == 0)
    assert report["arc"][0] == 0.0


def test_sign_report_columns(sym32):
    leaf = make_leaf(LEAF_COMPACT, 1.0, sym32, 10.0)
    report = sign_report(leaf, leaf_samples(leaf, 21))
    assert set(report) == {"y1", "arc", "value", "sign"}
    assert np.all(np.diff(report["arc"]) > 0.0)
    assert np.all(report["sign"] <= 0)


def test_leaf_validation(sym32):
    with pytest.raises(ValueError):
        FoliationLeaf("sphere", 1.0, sym32)
    with pytest.raises(ValueError):
        FoliationLeaf(LEAF_CYLINDER, 0.0, sym32)
    with pytest.raises(ValueError):
        FoliationLeaf(LEAF_COMPACT, 1.0, sym32, 10.0)
    leaf = make_leaf(LEAF_CYLINDER, 1.0, sym32)
    with pytest.raises(ValueError):
        foliation_divergence(leaf, [1.0])
