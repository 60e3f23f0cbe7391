"""Closed-Form Model Module"""
import math
from typing import Optional

import numpy as np

from ovals.classes import ProfileSamples, SymmetryClass, TipZoom
from ovals.solitons import BowlProfile


class SphereModel:
    """
    The round shrinking sphere, the exact solution every solver is checked
    against.

    A sphere S^n of radius R0 has radius sqrt(R0^2 - 2 n t) and vanishes at
    t = R0^2 / (2 n).
    """

    @staticmethod
    def radius(r0: float, n: int, t: float) -> float:
        """
        :param r0: initial radius
        :param n: dimension of the sphere
        :param t: time, t <= extinction time
        :return:
        """
        gap = r0 * r0 - 2.0 * n * t
        if gap < 0.0:
            raise ValueError(f"t={t} is past extinction of the radius {r0} sphere")
        return math.sqrt(gap)

    @staticmethod
    def extinction_time(r0: float, n: int) -> float:
        return r0 * r0 / (2.0 * n)

    @staticmethod
    def area_law(r0: float, n: int, t: float) -> float:
        """Area of the quarter disk bounded by the quotient circle."""
        return 0.25 * math.pi * SphereModel.radius(r0, n, t) ** 2


def cylinder_profile(rho: np.ndarray, sym: SymmetryClass) -> np.ndarray:
    """u = sqrt(2(n-k)), the fixed point of the renormalized flow."""
    return np.full_like(np.asarray(rho, dtype=float), sym.cylinder_radius)


def parabolic_ansatz(rho: np.ndarray, tau: float, sym: SymmetryClass, beta: float = 1.0) -> np.ndarray:
    """
    sqrt(2(n-k)) (1 - beta (rho^2 - 2k) / (4 |tau|)); beta = 1 is the sharp law.

    :param rho:
    :param tau: tau < 0
    :param sym:
    :param beta: coefficient of the quadratic correction
    :return:
    """
    if not tau < 0.0:
        raise ValueError(f"parabolic ansatz needs tau < 0, got {tau}")
    rho = np.asarray(rho, dtype=float)
    return sym.cylinder_radius * (1.0 - beta * (rho**2 - 2.0 * sym.k) / (4.0 * abs(tau)))


def intermediate_ellipse(sigma: np.ndarray, sym: SymmetryClass) -> np.ndarray:
    """sqrt((n-k)(2 - sigma^2)) for 0 <= sigma <= sqrt(2)."""
    sigma = np.asarray(sigma, dtype=float)
    return np.sqrt(sym.fiber * np.clip(2.0 - sigma**2, 0.0, None))


def width_prediction(tau: float) -> float:
    """Renormalized tip abscissa sqrt(2 |tau|)."""
    return math.sqrt(2.0 * abs(tau))


def tip_curvature_prediction(tau: float) -> float:
    """Renormalized tip mean curvature sqrt(2 |tau|) / 2."""
    return 0.5 * math.sqrt(2.0 * abs(tau))


def _samples(rho, u, u_grid, Y, tau, sym) -> ProfileSamples:
    return ProfileSamples(
        rho=np.asarray(rho, dtype=float),
        u=np.asarray(u, dtype=float),
        u_grid=np.asarray(u_grid, dtype=float),
        Y=np.asarray(Y, dtype=float),
        tau=float(tau),
        sym=sym,
    )


def cylinder_samples(tau: float, sym: SymmetryClass, rho_max: float = 10.0, count: int = 401) -> ProfileSamples:
    """Exact cylinder on [0, rho_max]; the inverse chart is a single vertical segment."""
    rho = np.linspace(0.0, rho_max, count)
    radius = sym.cylinder_radius
    return _samples(rho, cylinder_profile(rho, sym), [radius, radius], [rho_max, rho_max], tau, sym)


def parabolic_samples(tau: float, sym: SymmetryClass, rho_max: float = 4.0, count: int = 401,
                      beta: float = 1.0) -> ProfileSamples:
    """Parabolic ansatz sampled on [0, rho_max]; no inverse chart."""
    rho = np.linspace(0.0, rho_max, count)
    u = parabolic_ansatz(rho, tau, sym, beta)
    return _samples(rho, u, [0.0, 0.0], [rho_max, rho_max], tau, sym)


def ellipse_samples(tau: float, sym: SymmetryClass, sigma_max: float = 1.2, count: int = 801) -> ProfileSamples:
    """u(rho) = sqrt((n-k)(2 - rho^2 / |tau|)), the intermediate-region limit at scale |tau|."""
    if not sigma_max < math.sqrt(2.0):
        raise ValueError(f"sigma_max must stay below sqrt(2), got {sigma_max}")
    root = math.sqrt(abs(tau))
    rho = np.linspace(0.0, sigma_max * root, count)
    u = intermediate_ellipse(rho / root, sym)
    u_grid = np.linspace(0.0, u[-1], count)
    Y = root * np.sqrt(2.0 - u_grid**2 / sym.fiber)
    return _samples(rho, u, u_grid, Y, tau, sym)


def quarter_circle_samples(radius: float, tau: float, sym: SymmetryClass, count: int = 401,
                           fraction: float = 0.95) -> ProfileSamples:
    """
    Both charts of the circle u^2 + rho^2 = radius^2 on [0, fraction * radius].

    (u^2)_rho_rho = -2 holds exactly for this profile.
    """
    end = fraction * radius
    rho = np.linspace(0.0, end, count)
    u_grid = np.linspace(0.0, end, count)
    return _samples(rho, np.sqrt(radius**2 - rho**2), u_grid, np.sqrt(radius**2 - u_grid**2), tau, sym)


def tip_law_samples(tau: float, sym: SymmetryClass, count: int = 201,
                    width: Optional[float] = None, curvature: Optional[float] = None) -> ProfileSamples:
    """
    Samples whose tip sits at `width` with hypersurface mean curvature
    `curvature` there, both defaulting to the sharp laws.

    The inverse chart is the osculating parabola Y = width - kappa u^2 / 2
    with kappa chosen so (n-k+1) kappa + (k-1) / width = curvature.
    """
    width = width_prediction(tau) if width is None else width
    curvature = tip_curvature_prediction(tau) if curvature is None else curvature
    kappa = (curvature - (sym.k - 1) / width) / sym.d
    if not kappa > 0.0:
        raise ValueError(f"tip curvature {curvature} is too small for width {width}")
    u_grid = np.linspace(0.0, 0.5 / math.sqrt(abs(tau)), count)
    Y = width - 0.5 * kappa * u_grid**2
    rho = np.linspace(0.0, 0.5 * width, count)
    return _samples(rho, cylinder_profile(rho, sym), u_grid, Y, tau, sym)


def bowl_zoom(bowl: BowlProfile, tau: float, s_max: float = None, count: int = 201) -> TipZoom:
    """The bowl itself as a zoomed tip function."""
    s_max = bowl.s_max if s_max is None else s_max
    s = np.linspace(0.0, s_max, count)
    return TipZoom(s=s, Z=bowl.Z_at(s), tau=float(tau))
