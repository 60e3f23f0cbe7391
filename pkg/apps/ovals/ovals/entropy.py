"""
Gaussian density (Huisken's monotone quantity) for quotient curves, and the
entropies of round spheres that the width experiments normalize against.
"""
import logging
import math
from typing import Sequence

import numpy as np

import ovals.definitions as defs
import ovals.helpers
from ovals.classes import QuotientCurve, SymmetryClass
from ovals.errors import TargetOutOfRangeError

logger = logging.getLogger(__name__)


def sphere_entropy(j: int) -> float:
    """
    Gaussian density of the shrinking round j-sphere.

    The sphere of radius sqrt(2j s) at backward time s has density
    |S^j| (2js)^(j/2) (4 pi s)^(-j/2) e^(-j/2), independent of s.

    Ex.

    sphere_entropy(1) = sqrt(2 pi / e) ~ 1.52035
    sphere_entropy(2) = 4 / e ~ 1.47152

    :param j: sphere dimension, j >= 1
    :return: sigma_j
    :rtype: float
    """
    if j < 1:
        raise ValueError(f"sphere entropy needs j >= 1, got {j}")
    return ovals.helpers.sphere_area(j) * (j / (2.0 * math.pi * math.e)) ** (j / 2.0)


def target_density(sym: SymmetryClass) -> float:
    """Normalization target (sigma_(n-k) + sigma_(n-k+1)) / 2."""
    return 0.5 * (sphere_entropy(sym.fiber) + sphere_entropy(sym.fiber + 1))


def gaussian_kernel(sq_radius: np.ndarray, n: int, s: float) -> np.ndarray:
    """(4 pi s)^(-n/2) exp(-|x|^2 / 4s) for backward time s > 0."""
    return (4.0 * math.pi * s) ** (-n / 2.0) * np.exp(-np.asarray(sq_radius) / (4.0 * s))


def curve_density(curve: QuotientCurve, t0: float) -> float:
    """
    Huisken density of the hypersurface induced by a quotient curve, centered
    at the origin and time t0.

    The induced area element is |S^(k-1)| r^(k-1) |S^(n-k)| y^(n-k) ds; the
    integral along the polyline uses the trapezoidal rule in arc length.

    :param curve: unrescaled quotient curve at time curve.t
    :param t0: center time, t0 > curve.t
    :return: Theta
    """
    if curve.frame != defs.FRAME_UNRESCALED:
        raise ValueError("density is evaluated on unrescaled curves")
    s = t0 - curve.t
    if not s > 0.0:
        raise ValueError(f"density needs t < t0, got t={curve.t}, t0={t0}")
    sym = curve.sym
    r, y = curve.r, curve.y
    weight = (
        ovals.helpers.sphere_area(sym.k - 1)
        * r ** (sym.k - 1)
        * ovals.helpers.sphere_area(sym.fiber)
        * y**sym.fiber
    )
    f = gaussian_kernel(r**2 + y**2, sym.n, s) * weight
    ds = np.hypot(np.diff(r), np.diff(y))
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * ds))


def density_monotone(values: Sequence[float], slack: float = 1e-3) -> bool:
    """
    True if `values` is nonincreasing up to `slack`.

    :param values: densities in time order
    :param slack: tolerated increase between consecutive values
    :return:
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return True
    return bool(np.all(np.diff(values) <= slack))


def normalization_time(times: Sequence[float], densities: Sequence[float], target: float) -> float:
    """
    First time at which the density falls through `target`, by linear
    interpolation between the bracketing samples.

    :param times: sample times, increasing
    :param densities: Theta at those times (nan where undefined)
    :param target:
    :return: t'
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(densities, dtype=float)
    for i in range(values.size - 1):
        lo, hi = values[i], values[i + 1]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            continue
        if lo >= target >= hi:
            if lo == hi:
                return float(times[i])
            weight = (lo - target) / (lo - hi)
            return float(times[i] + weight * (times[i + 1] - times[i]))
    finite = values[np.isfinite(values)]
    achieved = (float(finite.min()), float(finite.max())) if finite.size else None
    raise TargetOutOfRangeError(f"density target {target:.6g} outside achieved range {achieved}", achieved=achieved)
