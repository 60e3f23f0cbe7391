"""
ODE kernels for the rotationally symmetric self-similar solutions used as
barriers and limit models: the compact-tip shrinkers u_a, the asymptotically
conical tail shrinkers u~_b, and the translating bowl.

All profiles solve

    u'' / (1 + u'^2) - (y/2) u' - (d-1)/u + u/2 = 0

(shrinkers) or

    Z'' / (1 + Z'^2) + (d-1) Z'/s + speed = 0

(bowl), with d - 1 the multiplicity of the rotated fiber.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

import ovals.definitions as defs
import ovals.helpers
from ovals.classes import SymmetryClass
from ovals.errors import ConvexityError, CoverageError, ShootingError

logger = logging.getLogger(__name__)

LEAF_COMPACT = "compact"
LEAF_TAIL = "tail"
LEAF_CYLINDER = "cylinder"

SIGN_TOLERANCE = 1e-12
_TIP_START = 1e-4


def _shrinker_rhs(d: int):
    def rhs(y, state):
        u, du = state
        return [du, (1.0 + du * du) * (0.5 * y * du + (d - 1) / u - 0.5 * u)]

    return rhs


def _shrinker_second(y, u, du, d: int):
    return (1.0 + du**2) * (0.5 * y * du + (d - 1) / u - 0.5 * u)


def _inverse_rhs(d: int, a: float):
    def rhs(u, state):
        Y, dY = state
        if u == 0.0:
            return [dY, -a / (2.0 * d)]
        return [dY, -(1.0 + dY * dY) * (0.5 * Y + ((d - 1) / u - 0.5 * u) * dY)]

    return rhs


def _inverse_second(u, Y, dY, d: int, a: float):
    u = np.asarray(u, dtype=float)
    out = np.full(u.shape, -a / (2.0 * d))
    mask = u > 0.0
    out[mask] = -(1.0 + dY[mask] ** 2) * (
        0.5 * Y[mask] + ((d - 1) / u[mask] - 0.5 * u[mask]) * dY[mask]
    )
    return out


@dataclass(frozen=True)
class ShrinkerProfile:
    """
    Compact-tip shrinker u_a on [0, a] with u_a(a) = 0.

    Stored in two charts: the graph chart (y, u, du) on [0, y_switch] in
    increasing y, and the tip chart (tip_u, tip_Y, tip_dY) on
    [0, u_switch] giving y = Y(u).
    """

    a: float
    d: int
    y: np.ndarray
    u: np.ndarray
    du: np.ndarray
    tip_u: np.ndarray
    tip_Y: np.ndarray
    tip_dY: np.ndarray

    @property
    def y_switch(self) -> float:
        return float(self.y[-1])

    @property
    def u0(self) -> float:
        """u_a(0)."""
        return float(self.u[0])

    def u_at(self, y: np.ndarray) -> np.ndarray:
        """u_a(y) for y in [0, a]; both charts are used."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(y < -1e-12) or np.any(y > self.a + 1e-12):
            raise CoverageError(f"y outside [0, {self.a}]")
        out = np.empty_like(y)
        graph = y <= self.y_switch
        out[graph] = CubicHermiteSpline(self.y, self.u, self.du)(y[graph])
        out[~graph] = self._u_from_tip(y[~graph])
        return out

    def _u_from_tip(self, y: np.ndarray) -> np.ndarray:
        return PchipInterpolator(self.tip_Y[::-1], self.tip_u[::-1])(y)

    def frame_at(self, y: np.ndarray) -> tuple:
        """
        Point, outward normal and mean curvature of the shrinker at axis
        positions y.

        :return: (y_point, u, nu_y, nu_u, H)
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(y < -1e-12) or np.any(y > self.a + 1e-12):
            raise CoverageError(f"y outside [0, {self.a}]")
        y_pt = np.empty_like(y)
        u = np.empty_like(y)
        nu_y = np.empty_like(y)
        nu_u = np.empty_like(y)
        H = np.empty_like(y)

        graph = y <= self.y_switch
        if np.any(graph):
            yg = y[graph]
            spline = CubicHermiteSpline(self.y, self.u, self.du)
            ug, dug = spline(yg), spline.derivative()(yg)
            W = np.sqrt(1.0 + dug**2)
            kappa = -_shrinker_second(yg, ug, dug, self.d) / W**3
            y_pt[graph], u[graph] = yg, ug
            nu_y[graph], nu_u[graph] = -dug / W, 1.0 / W
            H[graph] = kappa + (self.d - 1) / (ug * W)

        tip = ~graph
        if np.any(tip):
            ut = self._u_from_tip(y[tip])
            spline = CubicHermiteSpline(self.tip_u, self.tip_Y, self.tip_dY)
            Yt, dYt = spline(ut), spline.derivative()(ut)
            W = np.sqrt(1.0 + dYt**2)
            kappa = -_inverse_second(ut, Yt, dYt, self.d, self.a) / W**3
            fiber = np.empty_like(ut)
            on_axis = ut == 0.0
            fiber[on_axis] = kappa[on_axis]
            fiber[~on_axis] = -dYt[~on_axis] / (W[~on_axis] * ut[~on_axis])
            y_pt[tip], u[tip] = Yt, ut
            nu_y[tip], nu_u[tip] = 1.0 / W, -dYt / W
            H[tip] = kappa + (self.d - 1) * fiber
        return y_pt, u, nu_y, nu_u, H

    def columns(self) -> dict:
        """Profile CSV columns (y, value, derivative) from the axis to the tip."""
        tip = slice(None, None, -1)
        dY = self.tip_dY[tip]
        with np.errstate(divide="ignore"):
            tip_slope = np.where(dY == 0.0, -np.inf, 1.0 / dY)
        return {
            "y": np.concatenate([self.y, self.tip_Y[tip][1:]]),
            "value": np.concatenate([self.u, self.tip_u[tip][1:]]),
            "derivative": np.concatenate([self.du, tip_slope[1:]]),
        }


@dataclass(frozen=True)
class TailShrinkerProfile:
    """Asymptotically conical shrinker u~_b on [0, R_max], u~_b(y) ~ b y."""

    b: float
    d: int
    y: np.ndarray
    u: np.ndarray
    du: np.ndarray

    @property
    def r_max(self) -> float:
        return float(self.y[-1])

    def second_derivative(self) -> np.ndarray:
        return _shrinker_second(self.y, self.u, self.du, self.d)

    def u_at(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(y < -1e-12) or np.any(y > self.r_max + 1e-12):
            raise CoverageError(f"y outside [0, {self.r_max}]")
        return CubicHermiteSpline(self.y, self.u, self.du)(y)

    def frame_at(self, y: np.ndarray) -> tuple:
        """(y_point, u, nu_y, nu_u, H), see `ShrinkerProfile.frame_at`."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        u = self.u_at(y)
        du = CubicHermiteSpline(self.y, self.u, self.du).derivative()(y)
        W = np.sqrt(1.0 + du**2)
        kappa = -_shrinker_second(y, u, du, self.d) / W**3
        return y, u, -du / W, 1.0 / W, kappa + (self.d - 1) / (u * W)

    def columns(self) -> dict:
        return {"y": self.y, "value": self.u, "derivative": self.du}


@dataclass(frozen=True)
class BowlProfile:
    """Translating bowl Z(s) on [0, S_max], Z(0) = Z'(0) = 0, on a uniform grid."""

    d: int
    speed: float
    s: np.ndarray
    Z: np.ndarray
    dZ: np.ndarray

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    @property
    def series_curvature(self) -> float:
        """Z''(0) = -speed / d from the power series at the origin."""
        return -self.speed / self.d

    def Z_at(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0) or np.any(s > self.s_max * (1.0 + 1e-12)):
            raise CoverageError(f"s outside [0, {self.s_max}]")
        return CubicHermiteSpline(self.s, self.Z, self.dZ)(s)

    def curvature_at_origin(self) -> float:
        """Z''(0) estimated from Z'(h)/h and Z'(2h)/2h by Richardson extrapolation."""
        h = self.s[1] - self.s[0]
        return float((4.0 * self.dZ[1] / h - self.dZ[2] / (2.0 * h)) / 3.0)

    def columns(self) -> dict:
        return {"s": self.s, "value": self.Z, "derivative": self.dZ}


@dataclass(frozen=True)
class FoliationLeaf:
    """
    Shrinker shifted by eta along the first axis and rotated about it; the
    cylinder leaf has neither parameter nor profile.
    """

    kind: str
    eta: float
    sym: SymmetryClass
    param: float = float("nan")
    profile: object = None

    def __post_init__(self):
        if self.kind not in (LEAF_COMPACT, LEAF_TAIL, LEAF_CYLINDER):
            raise ValueError(f"unknown leaf kind {self.kind!r}")
        if not self.eta > 0.0:
            raise ValueError(f"shift must be positive, got {self.eta}")
        if self.kind != LEAF_CYLINDER and self.profile is None:
            raise ValueError(f"{self.kind} leaf needs a profile")

    @property
    def y1_min(self) -> float:
        """Smallest y1 where the sign argument applies, 2(k-1)/eta."""
        return 2.0 * (self.sym.k - 1) / self.eta

    @property
    def y1_max(self) -> float:
        if self.kind == LEAF_COMPACT:
            return self.eta + self.profile.a
        if self.kind == LEAF_TAIL:
            return self.eta + self.profile.r_max
        return math.inf


def shrinker_shoot(a: float, d: int, tol: float = 1e-10, n_samples: int = 801) -> ShrinkerProfile:
    """
    Shoot the compact-tip shrinker from its tip y = a down to y = 0.

    Near the tip y = Y(u) with the smooth-cap start Y = a - a u^2 / (4d);
    once |u'| <= 10 the graph chart u(y) takes over.

    Ex.

    d=3, a=10: u_a(0) ~ 2 (1 + a^-2) = 2.02, just above the cylinder radius 2

    :param a: tip position, a >= 2
    :param d: fiber dimension plus one, d >= 2
    :param tol: relative ODE tolerance
    :param n_samples: output samples per chart
    :return:
    """
    if not a >= defs.MIN_SHRINKER_TIP:
        raise ValueError(f"shrinker tip must satisfy a >= {defs.MIN_SHRINKER_TIP}, got {a}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    rtol, atol = tol, tol * 1e-2
    cap = -a / (2.0 * d)
    u0 = _TIP_START / max(1.0, a)

    def reach_graph_chart(u, state):
        return abs(state[1]) - 1.0 / defs.CHART_SWITCH_SLOPE

    reach_graph_chart.terminal = True
    u_limit = 10.0 * math.sqrt(2.0 * (d - 1))
    tip = solve_ivp(
        _inverse_rhs(d, a),
        (u0, u_limit),
        [a + 0.5 * cap * u0**2, cap * u0],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=reach_graph_chart,
        dense_output=True,
    )
    if tip.status != 1:
        raise ShootingError(f"tip chart of a={a}, d={d} never reached slope {defs.CHART_SWITCH_SLOPE}")
    u_switch = float(tip.t[-1])
    tip_u = np.concatenate([[0.0], np.linspace(u0, u_switch, n_samples)])
    tip_state = tip.sol(tip_u[1:])
    tip_Y = np.concatenate([[a], tip_state[0]])
    tip_dY = np.concatenate([[0.0], tip_state[1]])
    y_switch, slope = float(tip.y[0, -1]), 1.0 / float(tip.y[1, -1])
    if not 0.0 < y_switch < a:
        raise ShootingError(f"chart switch at y={y_switch} outside (0, {a})")

    def collapse(y, state):
        return state[0] - 1e-8

    def blowup(y, state):
        return abs(state[1]) - 1e6

    collapse.terminal = True
    blowup.terminal = True
    graph = solve_ivp(
        _shrinker_rhs(d),
        (y_switch, 0.0),
        [u_switch, slope],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=(collapse, blowup),
        dense_output=True,
    )
    if graph.status != 0:
        raise ShootingError(
            f"shrinker a={a}, d={d} blew up at y={graph.t[-1]:.6g} before reaching the axis"
        )
    y = np.linspace(0.0, y_switch, n_samples)
    state = graph.sol(y)
    y[-1] = y_switch
    state[:, -1] = graph.y[:, 0]
    if not np.all(np.isfinite(state)) or np.any(state[0] <= 0.0):
        raise ShootingError(f"shrinker a={a}, d={d} left the admissible range")
    logger.debug("[SOLITON] shrinker a=%g d=%d u(0)=%.10g", a, d, state[0, 0])
    return ShrinkerProfile(a, d, y, state[0], state[1], tip_u, tip_Y, tip_dY)


def tail_shrinker_shoot(b: float, d: int, r_max: float = defs.DEFAULT_TAIL_RADIUS,
                        tol: float = 1e-10, n_samples: int = 2001) -> TailShrinkerProfile:
    """
    Integrate the conical shrinker inward from y = r_max, starting from
    u = b y + (d-1)/(b y), and verify convexity.

    :param b: asymptotic slope, 0 < b <= 1
    :param d: d >= 2
    :param r_max: r_max >= 20
    :param tol:
    :param n_samples:
    :return:
    """
    if not 0.0 < b <= 1.0:
        raise ValueError(f"slope must satisfy 0 < b <= 1, got {b}")
    if not r_max >= defs.MIN_TAIL_RADIUS:
        raise ValueError(f"r_max must be >= {defs.MIN_TAIL_RADIUS}, got {r_max}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    start = [b * r_max + (d - 1) / (b * r_max), b - (d - 1) / (b * r_max**2)]

    def collapse(y, state):
        return state[0] - 1e-8

    collapse.terminal = True
    y = np.linspace(0.0, r_max, n_samples)
    sol = solve_ivp(
        _shrinker_rhs(d),
        (r_max, 0.0),
        start,
        method="LSODA",
        rtol=tol,
        atol=tol * 1e-2,
        t_eval=y[::-1],
        events=collapse,
    )
    if sol.status != 0 or sol.t.size != y.size:
        raise ShootingError(f"tail shrinker b={b}, d={d} failed at y={sol.t[-1]:.6g}")
    profile = TailShrinkerProfile(b, d, y, sol.y[0, ::-1].copy(), sol.y[1, ::-1].copy())
    second = profile.second_derivative()
    worst = float(second[y >= 1.0].min())
    if worst < -1e-6:
        raise ConvexityError(f"tail shrinker b={b}, d={d} not convex: u''={worst:.3g}")
    logger.debug("[SOLITON] tail shrinker b=%g d=%d u(0)=%.10g", b, d, profile.u[0])
    return profile


def bowl_solve(d: int, speed: float = defs.BOWL_SPEED, s_max: float = 10.0,
               spacing: float = 0.01, tol: float = 1e-12) -> BowlProfile:
    """
    Bowl profile from its power series at the removable singularity s = 0.

    Ex.

    d=2, speed=sqrt(2)/2: Z''(0) = -sqrt(2)/4

    :param d: d >= 2
    :param speed: translation speed > 0
    :param s_max:
    :param spacing: uniform sample spacing
    :param tol:
    :return:
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not (math.isfinite(speed) and speed > 0.0):
        raise ValueError(f"speed must be positive and finite, got {speed}")
    if not (math.isfinite(s_max) and s_max > 4.0 * spacing):
        raise ValueError(f"s_max={s_max} too short for spacing {spacing}")
    alpha = -speed / d
    s0 = _TIP_START

    def rhs(s, state):
        dZ = state[1]
        return [dZ, -(1.0 + dZ * dZ) * ((d - 1) * dZ / s + speed)]

    count = int(round(s_max / spacing))
    s = np.linspace(0.0, count * spacing, count + 1)
    sol = solve_ivp(
        rhs,
        (s0, s[-1]),
        [0.5 * alpha * s0**2, alpha * s0],
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-2,
        t_eval=s[1:],
    )
    if sol.status != 0:
        raise ShootingError(f"bowl d={d} integration failed: {sol.message}")
    Z = np.concatenate([[0.0], sol.y[0]])
    dZ = np.concatenate([[0.0], sol.y[1]])
    return BowlProfile(d, speed, s, Z, dZ)


def translator_residual(bowl: BowlProfile, s_min: float = 0.1) -> float:
    """
    max |H - speed <nu, axis>| at interior samples, with Z'' from
    fourth-order differences of the sampled slope.

    :param bowl:
    :param s_min: samples closer to the origin are skipped
    :return:
    """
    h = bowl.s[1] - bowl.s[0]
    dZ = bowl.dZ
    ddZ = ovals.helpers.fourth_order_derivative(dZ, h)
    W = np.sqrt(1.0 + dZ**2)
    s = bowl.s
    mask = s >= s_min
    mask[:3] = False
    mask[-3:] = False
    residual = ddZ[mask] / W[mask] ** 3 + (bowl.d - 1) * dZ[mask] / (s[mask] * W[mask]) + bowl.speed / W[mask]
    return float(np.max(np.abs(residual)))


def leaves_nested(profiles: Sequence[ShrinkerProfile], y_min: float = 2.0, count: int = 200) -> bool:
    """
    True when u_a < u_a' for a < a' on [y_min, min(a)) for each sorted pair.

    Near the axis the profiles cross the cylinder, so `y_min` bounds the
    check from below.
    """
    ordered = sorted(profiles, key=lambda p: p.a)
    for lower, upper in zip(ordered, ordered[1:]):
        y_end = lower.a * (1.0 - 1e-3)
        if y_end <= y_min:
            raise CoverageError(f"no common domain above y={y_min} for a={lower.a}")
        y = np.linspace(y_min, y_end, count)
        if not np.all(lower.u_at(y) < upper.u_at(y)):
            return False
    return True


def shrinker_bound_margin(profile: ShrinkerProfile, fraction: float = 0.5, count: int = 201) -> float:
    """
    min of sqrt(2(d-1)) (1 - (y^2 - 3) / (2 a^2)) - u_a(y) over [0, fraction * a];
    nonnegative when the upper bound holds.
    """
    y = np.linspace(0.0, fraction * profile.a, count)
    bound = math.sqrt(2.0 * (profile.d - 1)) * (1.0 - (y**2 - 3.0) / (2.0 * profile.a**2))
    return float(np.min(bound - profile.u_at(y)))


def make_leaf(kind: str, eta: float, sym: SymmetryClass, param: float = float("nan"),
              **shoot_kwargs) -> FoliationLeaf:
    """
    Build a foliation leaf for `sym`; the shrinker has fiber dimension n - k.

    :param kind: "compact" (param = a), "tail" (param = b) or "cylinder"
    :param eta: axial shift
    :param sym:
    :param param:
    :return:
    """
    if kind == LEAF_COMPACT:
        return FoliationLeaf(kind, eta, sym, param, shrinker_shoot(param, sym.d, **shoot_kwargs))
    if kind == LEAF_TAIL:
        return FoliationLeaf(kind, eta, sym, param, tail_shrinker_shoot(param, sym.d, **shoot_kwargs))
    return FoliationLeaf(kind, eta, sym)


def leaf_samples(leaf: FoliationLeaf, count: int = 101, y1_max: float = None) -> np.ndarray:
    """Uniform y1 grid from 2(k-1)/eta (or the leaf start) to the leaf end."""
    start = max(leaf.y1_min, leaf.eta)
    end = leaf.y1_max if y1_max is None else min(y1_max, leaf.y1_max)
    if not math.isfinite(end):
        end = start + 10.0
    return np.linspace(start, end, count)


def foliation_divergence(leaf: FoliationLeaf, samples: np.ndarray) -> np.ndarray:
    """
    H_Gamma - <x, nu> / 2 on the shifted and rotated leaf, with
    H_Gamma = H_Sigma + (k-1) nu_1 / y1.

    Nonpositive on compact leaves, nonnegative on tail leaves and zero on
    the cylinder, for y1 >= 2(k-1)/eta.

    :param leaf:
    :param samples: y1 positions
    :return: values at the samples
    """
    y1 = np.atleast_1d(np.asarray(samples, dtype=float))
    if np.any(y1 < leaf.y1_min * (1.0 - 1e-12)):
        raise ValueError(f"samples must satisfy y1 >= {leaf.y1_min:.6g}")
    if np.any(y1 < leaf.eta - 1e-12) or np.any(y1 > leaf.y1_max + 1e-12):
        raise CoverageError(f"samples outside the leaf domain [{leaf.eta}, {leaf.y1_max}]")
    k, d = leaf.sym.k, leaf.sym.d
    if leaf.kind == LEAF_CYLINDER:
        radius = leaf.sym.cylinder_radius
        return np.full_like(y1, (d - 1) / radius - 0.5 * radius)
    y, u, nu_y, nu_u, H = leaf.profile.frame_at(np.clip(y1 - leaf.eta, 0.0, None))
    y1_pt = y + leaf.eta
    support = y1_pt * nu_y + u * nu_u
    return H + (k - 1) * nu_y / y1_pt - 0.5 * support


def sign_report(leaf: FoliationLeaf, samples: np.ndarray) -> dict:
    """
    Sign report columns (y1, arc, value, sign); arc is the profile arc
    length measured from the leaf start.
    """
    y1 = np.atleast_1d(np.asarray(samples, dtype=float))
    values = foliation_divergence(leaf, y1)
    if leaf.kind == LEAF_CYLINDER:
        arc = y1 - y1[0]
    else:
        u = leaf.profile.u_at(np.clip(y1 - leaf.eta, 0.0, None))
        arc = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(y1), np.diff(u)))])
    sign = np.where(values > SIGN_TOLERANCE, 1, np.where(values < -SIGN_TOLERANCE, -1, 0))
    return {"y1": y1, "arc": arc, "value": values, "sign": sign}
