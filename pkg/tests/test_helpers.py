import math

import numpy as np
import pytest

from ovals.helpers import (
    INVALID_CHAR,
    clamp,
    format_float,
    fourth_order_derivative,
    linear_extrapolate_root,
    smooth_cutoff,
    sphere_area,
    uniform_derivatives,
)


def test_format_float():
    assert format_float(1.23456, 2) == "1.23"
    assert format_float(3) == "3.0000"
    assert format_float(None) == INVALID_CHAR
    assert format_float(float("nan")) == INVALID_CHAR
    assert format_float("abc") == INVALID_CHAR


def test_clamp():
    assert clamp(0.01, 0.05, 0.95) == 0.05
    assert clamp(0.99, 0.05, 0.95) == 0.95
    assert clamp(0.3, 0.05, 0.95) == 0.3


def test_sphere_area():
    assert sphere_area(0) == pytest.approx(2.0)
    assert sphere_area(1) == pytest.approx(2.0 * math.pi)
    assert sphere_area(2) == pytest.approx(4.0 * math.pi)
    assert sphere_area(3) == pytest.approx(2.0 * math.pi**2)
    with pytest.raises(ValueError):
        sphere_area(-1)


def test_smooth_cutoff_plateaus_and_midpoint():
    x = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    np.testing.assert_allclose(smooth_cutoff(x), [1.0, 1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-15)


def test_uniform_derivatives_exact_on_quadratics():
    x = np.linspace(0.0, 2.0, 41)
    first, second = uniform_derivatives(x**2, x[1] - x[0])
    np.testing.assert_allclose(first, 2.0 * x, atol=1e-10)
    np.testing.assert_allclose(second, 2.0, atol=1e-8)


def test_fourth_order_derivative_exact_on_cubics():
    x = np.linspace(-1.0, 1.0, 81)
    out = fourth_order_derivative(x**3, x[1] - x[0])
    np.testing.assert_allclose(out[2:-2], 3.0 * x[2:-2] ** 2, atol=1e-10)


def test_linear_extrapolate_root():
    root, slope = linear_extrapolate_root(np.array([0.0, 1.0, 2.0]), np.array([4.0, 2.0, 0.0]))
    assert root == pytest.approx(2.0)
    assert slope == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        linear_extrapolate_root(np.array([0.0, 1.0]), np.array([1.0, 2.0]))
