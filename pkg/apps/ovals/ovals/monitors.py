"""Estimate Monitors Module"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

import ovals.definitions as defs
import ovals.helpers
import ovals.radial_flow
from ovals.classes import ProfileSamples

logger = logging.getLogger(__name__)

SERIES = ("quadratic_concavity", "cylindrical", "collar", "k_convexity")

# stencil width of the centered differences behind every monitored derivative
STENCIL_WIDTH = 3


@dataclass
class MonitorSeries:
    """
    tau series of the four a-priori quantities. A value is nan where its
    evaluation domain was empty at that tau; `empty` lists those taus.
    """

    taus: List[float] = field(default_factory=list)
    quadratic_concavity: List[float] = field(default_factory=list)
    cylindrical: List[float] = field(default_factory=list)
    collar: List[float] = field(default_factory=list)
    k_convexity: List[float] = field(default_factory=list)
    domains: Dict[str, List[tuple]] = field(default_factory=lambda: {name: [] for name in SERIES})
    empty: Dict[str, List[float]] = field(default_factory=lambda: {name: [] for name in SERIES})
    L: float = defs.DEFAULT_L
    theta: float = float("nan")
    stencil: int = STENCIL_WIDTH

    def series(self, name: str) -> np.ndarray:
        if name not in SERIES:
            raise KeyError(f"unknown monitor series {name!r}")
        return np.asarray(getattr(self, name), dtype=float)

    def evaluated(self, name: str) -> np.ndarray:
        """Finite values of one series."""
        values = self.series(name)
        return values[np.isfinite(values)]

    def columns(self) -> dict:
        return {"tau": self.taus, **{name: getattr(self, name) for name in SERIES}}


def _uniform_graph(p: ProfileSamples, u_min: float) -> Optional[tuple]:
    """Uniform rho grid on the graph chart restricted to {u >= u_min}."""
    keep = p.u >= u_min
    if np.count_nonzero(keep) < 4:
        return None
    end = float(p.rho[keep][-1])
    if not end > 0.0:
        return None
    count = max(int(np.count_nonzero(keep)), 5)
    rho = np.linspace(0.0, end, count)
    return rho, np.interp(rho, p.rho, p.u)


def quadratic_concavity(p: ProfileSamples) -> Optional[tuple]:
    """max (u^2)_rho_rho over the graph chart."""
    if p.rho.size < 5:
        return None
    h = p.rho[1] - p.rho[0]
    if not np.allclose(np.diff(p.rho), h):
        rho = np.linspace(p.rho[0], p.rho[-1], p.rho.size)
        u = np.interp(rho, p.rho, p.u)
        h = rho[1] - rho[0]
    else:
        u = p.u
    _, second = ovals.helpers.uniform_derivatives(u**2, h)
    return float(np.max(second)), (float(p.rho[0]), float(p.rho[-1]))


def cylindrical(p: ProfileSamples, L: float) -> Optional[tuple]:
    """max |u_rho| + u |u_rho_rho| over {u >= L / sqrt|tau|}."""
    u_min = L / math.sqrt(abs(p.tau))
    graph = _uniform_graph(p, u_min)
    if graph is None:
        return None
    rho, u = graph
    first, second = ovals.helpers.uniform_derivatives(u, rho[1] - rho[0])
    return float(np.max(np.abs(first) + u * np.abs(second))), (0.0, float(rho[-1]))


def collar(p: ProfileSamples, L: float, theta: float) -> Optional[tuple]:
    """max |1 + u Y / (2(n-k) Y_u)| over L / sqrt|tau| <= u <= 2 theta."""
    lo = L / math.sqrt(abs(p.tau))
    hi = min(2.0 * theta, float(p.u_grid[-1]))
    if p.u_grid.size < 5 or not hi > lo:
        return None
    u = np.linspace(lo, hi, max(int(np.count_nonzero((p.u_grid >= lo) & (p.u_grid <= hi))), 5))
    Y = np.interp(u, p.u_grid, p.Y)
    first, _ = ovals.helpers.uniform_derivatives(Y, u[1] - u[0])
    if np.any(first == 0.0):
        return None
    quantity = np.abs(1.0 + u * Y / (2.0 * p.sym.fiber * first))
    return float(np.max(quantity)), (lo, hi)


def k_convexity(p: ProfileSamples) -> Optional[tuple]:
    """
    min (lambda_1 + ... + lambda_(k+1)) / H over the polyline, the principal
    curvatures being kappa, (k-1) copies of <nu,e_r>/r and (n-k) of <nu,e_y>/y.
    """
    if p.curve is None:
        return None
    sym = p.sym
    geom = ovals.radial_flow.curve_geometry(p.curve.nodes, sym)
    principal = np.column_stack(
        [geom.kappa] + [geom.q_r] * (sym.k - 1) + [geom.q_y] * sym.fiber
    )
    principal.sort(axis=1)
    H = principal.sum(axis=1)
    if np.any(H <= 0.0):
        return None
    return float(np.min(principal[:, : sym.k + 1].sum(axis=1) / H)), (0.0, float(p.curve.tip))


def monitor_estimates(samples: Sequence[ProfileSamples], L: float = defs.DEFAULT_L,
                      theta: float = None) -> MonitorSeries:
    """
    Evaluate the four monitored quantities at every sample.

    :param samples: renormalized samples
    :param L: tip-scale constant of the cylindrical and collar domains
    :param theta: collar height, defaulting to 0.3 sqrt(2(n-k))
    :return:
    """
    out = MonitorSeries(L=L)
    for p in sorted(samples, key=lambda s: s.tau):
        theta_p = defs.CUTOFF_THETA_FRACTION * p.sym.cylinder_radius if theta is None else theta
        out.theta = theta_p
        out.taus.append(float(p.tau))
        results = {
            "quadratic_concavity": quadratic_concavity(p),
            "cylindrical": cylindrical(p, L),
            "collar": collar(p, L, theta_p),
            "k_convexity": k_convexity(p),
        }
        for name, result in results.items():
            if result is None:
                getattr(out, name).append(float("nan"))
                out.domains[name].append(None)
                out.empty[name].append(float(p.tau))
            else:
                value, domain = result
                getattr(out, name).append(value)
                out.domains[name].append(domain)
    for name in SERIES:
        if out.empty[name]:
            logger.info("[MONITOR] %s domain empty at %d of %d taus", name, len(out.empty[name]), len(out.taus))
    return out


class Monitor:
    """
    Threshold check on one monitored series.

    `check` does nothing unless the monitor is on; if `condition` holds
    for a value, `handle` logs it and records the tau.
    """

    active: bool = False
    series: str = ""

    def __init__(self, limit: float):
        self.limit = limit
        self.tripped: List[float] = []

    def is_active(self) -> bool:
        return self.active

    def on(self) -> None:
        self.active = True

    def off(self) -> None:
        self.active = False

    def check(self, tau: float, value: float) -> None:
        if self.is_active() and math.isfinite(value):
            if self.condition(value):
                self.handle(tau, value)

    def condition(self, value: float) -> bool:
        return False

    def handle(self, tau: float, value: float) -> None:
        logger.warning(
            "[MONITOR] %s = %s at tau=%s violates limit %s",
            self.series, ovals.helpers.format_float(value, 6), ovals.helpers.format_float(tau, 4), self.limit,
        )
        self.tripped.append(tau)

    def reset(self) -> None:
        self.tripped = []


class QuadraticConcavityMonitor(Monitor):
    """Condition: (u^2)_rho_rho > limit."""

    series = "quadratic_concavity"

    def condition(self, value: float) -> bool:
        return value > self.limit


class CylindricalMonitor(Monitor):
    """Condition: |u_rho| + u |u_rho_rho| > limit."""

    series = "cylindrical"

    def condition(self, value: float) -> bool:
        return value > self.limit


class CollarMonitor(Monitor):
    """Condition: |1 + u Y / (2(n-k) Y_u)| > limit."""

    series = "collar"

    def condition(self, value: float) -> bool:
        return value > self.limit


class KConvexityMonitor(Monitor):
    """Condition: the (k+1)-convexity ratio drops to the limit or below."""

    series = "k_convexity"

    def condition(self, value: float) -> bool:
        return value <= self.limit


class Watchdog:
    """
    Holds one monitor per series and runs all of them over a MonitorSeries.

    Every monitor starts on; `turn_all_monitors_off` disables them.
    """

    def __init__(self, concavity_limit: float = defs.CONCAVITY_LIMIT,
                 cylindrical_limit: float = defs.CYLINDRICAL_LIMIT,
                 collar_limit: float = defs.COLLAR_LIMIT,
                 convexity_floor: float = 0.0):
        self.quadratic_concavity_monitor = QuadraticConcavityMonitor(concavity_limit)
        self.cylindrical_monitor = CylindricalMonitor(cylindrical_limit)
        self.collar_monitor = CollarMonitor(collar_limit)
        self.k_convexity_monitor = KConvexityMonitor(convexity_floor)
        for monitor in self.monitors():
            monitor.on()

    def monitors(self) -> List[Monitor]:
        return [m for m in self.__dict__.values() if isinstance(m, Monitor)]

    def turn_all_monitors_off(self) -> None:
        for monitor in self.monitors():
            monitor.off()

    def check_monitors(self, series: MonitorSeries, tau_min: float = -math.inf) -> None:
        """Run every active monitor over the taus at or after tau_min."""
        for monitor in self.monitors():
            monitor.reset()
            for tau, value in zip(series.taus, getattr(series, monitor.series)):
                if tau >= tau_min:
                    monitor.check(tau, value)

    def passed(self) -> bool:
        return not any(monitor.tripped for monitor in self.monitors())

    def report(self) -> Dict[str, List[float]]:
        """Series name -> taus at which its monitor tripped."""
        return {monitor.series: list(monitor.tripped) for monitor in self.monitors()}
