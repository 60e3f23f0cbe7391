"""Helpers Module"""
import math
from typing import Union

import numpy as np
from scipy.special import gamma


INVALID_CHAR = "~"


def format_float(value: Union[float, int, str], precision: int = 4) -> str:
    """
    Helper method to format a value as a float with
    precision and handle possible None or non-finite values.

    :param value:
    :param precision:
    :return:
    """
    try:
        if value is None or not math.isfinite(float(value)):
            return INVALID_CHAR
        return format(float(value), ".{}f".format(precision))
    except (TypeError, ValueError):
        return INVALID_CHAR


def clamp(value: float, lower: float, upper: float) -> float:
    """Clamp `value` to the closed interval [lower, upper]."""
    return max(lower, min(upper, value))


def sphere_area(j: int) -> float:
    """
    Area of the unit j-sphere in R^(j+1).

    Ex.

    sphere_area(0) = 2 (two points), sphere_area(1) = 2 pi, sphere_area(2) = 4 pi

    :param j: sphere dimension, j >= 0
    :return: |S^j|
    :rtype: float
    """
    if j < 0:
        raise ValueError(f"sphere dimension must be nonnegative, got {j}")
    return 2.0 * math.pi ** ((j + 1) / 2.0) / gamma((j + 1) / 2.0)


def smooth_cutoff(x: np.ndarray) -> np.ndarray:
    """
    C^2 cutoff equal to 1 on x <= 1 and 0 on x >= 2, the quintic
    smoothstep in between.

    :param x:
    :return:
    """
    t = np.clip(np.asarray(x, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def uniform_derivatives(values: np.ndarray, h: float) -> tuple:
    """
    First and second derivatives of samples on a uniform grid by centered
    differences (3-point stencil), one-sided second-order at the ends.

    :param values:
    :param h: grid spacing
    :return: (first, second)
    """
    values = np.asarray(values, dtype=float)
    first = np.gradient(values, h, edge_order=2)
    second = np.empty_like(values)
    second[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / h**2
    second[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h**2
    second[-1] = (
        2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]
    ) / h**2
    return first, second


def fourth_order_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """
    First derivative on a uniform grid with the 5-point centered stencil;
    the two outermost points on each side fall back to `np.gradient`.

    :param values:
    :param h:
    :return:
    """
    values = np.asarray(values, dtype=float)
    out = np.gradient(values, h, edge_order=2)
    out[2:-2] = (
        -values[4:] + 8.0 * values[3:-1] - 8.0 * values[1:-3] + values[:-4]
    ) / (12.0 * h)
    return out


def linear_extrapolate_root(times: np.ndarray, sizes: np.ndarray) -> tuple:
    """
    Fit sizes ~ slope * t + intercept and return the time where the fit
    reaches zero along with the slope.

    :param times:
    :param sizes:
    :return: (root, slope)
    """
    slope, intercept = np.polyfit(np.asarray(times, float), np.asarray(sizes, float), 1)
    if not slope < 0.0:
        raise ValueError(f"size is not decreasing (fitted slope {slope})")
    return -intercept / slope, slope
