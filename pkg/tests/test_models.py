import math

import numpy as np
import pytest

from ovals import models


def test_sphere_model():
    assert models.SphereModel.extinction_time(math.sqrt(6.0), 3) == pytest.approx(1.0)
    assert models.SphereModel.radius(2.0, 2, 0.5) == pytest.approx(math.sqrt(2.0))
    assert models.SphereModel.area_law(2.0, 2, 0.0) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        models.SphereModel.radius(2.0, 2, 1.5)


def test_parabolic_ansatz_crosses_cylinder(sym32):
    rho = np.array([0.0, 2.0, 3.0])
    u = models.parabolic_ansatz(rho, -50.0, sym32)
    assert u[1] == pytest.approx(sym32.cylinder_radius)
    assert u[0] > sym32.cylinder_radius > u[2]
    with pytest.raises(ValueError):
        models.parabolic_ansatz(rho, 0.0, sym32)


def test_intermediate_ellipse(sym42):
    u = models.intermediate_ellipse(np.array([0.0, 1.0, math.sqrt(2.0), 2.0]), sym42)
    np.testing.assert_allclose(u, [2.0, math.sqrt(2.0), 0.0, 0.0], atol=1e-12)


def test_ellipse_samples_charts_agree(sym42):
    samples = models.ellipse_samples(-100.0, sym42)
    assert samples.Y[0] == pytest.approx(math.sqrt(200.0))
    assert samples.u[0] == pytest.approx(sym42.cylinder_radius)
    with pytest.raises(ValueError):
        models.ellipse_samples(-100.0, sym42, sigma_max=1.5)


def test_tip_law_samples(sym32):
    samples = models.tip_law_samples(-8.0, sym32)
    assert samples.Y[0] == pytest.approx(models.width_prediction(-8.0))
    assert models.tip_curvature_prediction(-8.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        models.tip_law_samples(-8.0, sym32, width=1.0, curvature=0.5)
