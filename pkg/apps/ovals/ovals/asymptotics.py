"""
Region-by-region comparison of renormalized profiles with the sharp
asymptotic laws of the ancient ovals:

    parabolic     u = sqrt(2(n-k)) (1 - (rho^2 - 2k) / (4|tau|))   for rho <= M
    intermediate  u(sigma sqrt|tau|) -> sqrt((n-k)(2 - sigma^2))    for sigma in K
    tip           Z(s) -> bowl profile                              for s <= S
    width         tip at sqrt(2|tau|), tip mean curvature sqrt(2|tau|) / 2
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import ovals.definitions as defs
import ovals.radial_flow
from ovals import models
from ovals.classes import ProfileSamples, SymmetryClass, TipZoom
from ovals.errors import CoverageError
from ovals.solitons import BowlProfile, bowl_solve

logger = logging.getLogger(__name__)

REGIONS = ("parabolic", "intermediate", "tip", "width")

# the intermediate window must stay this far below sqrt(2)
SIGMA_MARGIN = 0.05
# inverse-chart points used to fit the osculating parabola at the tip
TIP_FIT_POINTS = 5


@dataclass
class RegionParams:
    """Fixed witnesses for the universally quantified ranges of the laws."""

    M: float = defs.DEFAULT_M
    K: Tuple[float, float] = defs.DEFAULT_K_WINDOW
    S: float = defs.DEFAULT_S
    count: int = 201
    bowl: Optional[BowlProfile] = None
    sym: Optional[SymmetryClass] = None

    def __post_init__(self):
        if not (self.M > 0.0 and self.S > 0.0):
            raise ValueError(f"M and S must be positive, got M={self.M}, S={self.S}")
        lo, hi = self.K
        if not 0.0 <= lo < hi <= math.sqrt(2.0) - SIGMA_MARGIN:
            raise ValueError(f"K={self.K} must be a compact subset of [0, sqrt(2) - {SIGMA_MARGIN}]")
        if self.count < 3:
            raise ValueError(f"count must be >= 3, got {self.count}")


@dataclass
class RegionReport:
    """
    Measured against predicted values over a tau window, with the
    sup-norm deviation at every window point.
    """

    region: str
    taus: np.ndarray
    measured: np.ndarray
    predicted: np.ndarray
    deviations: np.ndarray
    coefficients: Dict[str, list] = field(default_factory=dict)
    domain: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.taus = np.asarray(self.taus, dtype=float)
        self.measured = np.asarray(self.measured, dtype=float)
        self.predicted = np.asarray(self.predicted, dtype=float)
        self.deviations = np.asarray(self.deviations, dtype=float)
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}")
        if self.taus.size == 0:
            raise ValueError("region report needs a nonempty window")
        if np.any(self.deviations < 0.0):
            raise ValueError("deviations must be nonnegative")

    @property
    def window(self) -> Tuple[float, float]:
        return float(self.taus[0]), float(self.taus[-1])

    @property
    def deviation(self) -> float:
        """Deviation at the latest window point."""
        return float(self.deviations[-1])

    def trend_points(self, count: int = 3) -> np.ndarray:
        """Deviations at `count` evenly spaced window points, first and last included."""
        index = np.unique(np.linspace(0, self.taus.size - 1, count).round().astype(int))
        return self.deviations[index]

    def improving(self, count: int = 3) -> bool:
        """True if the deviation does not grow over the trend points."""
        points = self.trend_points(count)
        return points.size >= 2 and bool(np.all(np.diff(points) <= 0.0))

    def columns(self) -> dict:
        return {
            "tau": self.taus,
            "measured": self.measured,
            "predicted": self.predicted,
            "deviation": self.deviations,
        }

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "window": list(self.window),
            "deviation": self.deviation,
            "deviations": self.deviations.tolist(),
            "coefficients": {k: [float(x) for x in v] for k, v in self.coefficients.items()},
            "domain": dict(self.domain),
        }


def _require(values: np.ndarray, what: str, tau: float) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise CoverageError(f"samples at tau={tau:.6g} do not cover the {what}")
    return values


def _parabolic(p: ProfileSamples, params: RegionParams) -> tuple:
    tau = p.tau
    if not tau < 0.0:
        raise CoverageError(f"parabolic law needs tau < 0, got {tau}")
    rho = np.linspace(0.0, params.M, params.count)
    u = _require(p.u_at(rho), f"range rho <= {params.M}", tau)
    predicted = models.parabolic_ansatz(rho, tau, p.sym)
    deviation = abs(tau) * float(np.max(np.abs(u - predicted)))

    # least-squares beta in u / sqrt(2(n-k)) - 1 = -beta (rho^2 - 2k) / (4|tau|)
    x = (rho**2 - 2.0 * p.sym.k) / (4.0 * abs(tau))
    g = u / p.sym.cylinder_radius - 1.0
    beta = -float(np.dot(g, x) / np.dot(x, x))
    return beta, 1.0, deviation, {"beta": beta}


def _intermediate(p: ProfileSamples, params: RegionParams) -> tuple:
    tau = p.tau
    lo, hi = params.K
    sigma = np.linspace(lo, hi, params.count)
    u = _require(p.u_at(sigma * math.sqrt(abs(tau))), f"window sigma in [{lo}, {hi}]", tau)
    predicted = models.intermediate_ellipse(sigma, p.sym)
    deviation = float(np.max(np.abs(u - predicted)))
    return float(u[-1]), float(predicted[-1]), deviation, {}


def _zoom(sample: Union[ProfileSamples, TipZoom], params: RegionParams) -> TipZoom:
    if isinstance(sample, TipZoom):
        if sample.s[-1] < params.S * (1.0 - 1e-12):
            raise CoverageError(f"zoom reaches s={sample.s[-1]:.4g}, comparison needs {params.S}")
        return sample
    return ovals.radial_flow.zoom_tip(sample, params.S, params.count)


def _tip(sample: Union[ProfileSamples, TipZoom], params: RegionParams, bowl: BowlProfile) -> tuple:
    zoom = _zoom(sample, params)
    inside = zoom.s <= params.S * (1.0 + 1e-12)
    s, Z = zoom.s[inside], zoom.Z[inside]
    predicted = bowl.Z_at(s)
    deviation = float(np.max(np.abs(Z - predicted)))
    return float(Z[-1]), float(predicted[-1]), deviation, {}


def tip_mean_curvature(p: ProfileSamples) -> float:
    """
    Mean curvature of the induced hypersurface at the tip, from the polyline
    when present and otherwise from a parabola fitted to the inverse chart.
    """
    if p.curve is not None:
        return ovals.radial_flow.tip_curvature(p.curve)
    if p.u_grid.size < TIP_FIT_POINTS:
        raise CoverageError("inverse chart too short to fit the tip curvature")
    u, Y = p.u_grid[:TIP_FIT_POINTS], p.Y[:TIP_FIT_POINTS]
    kappa = -np.polyfit(u, Y, 2)[0] * 2.0
    return float(p.sym.d * kappa + (p.sym.k - 1) / p.tip)


def _width(p: ProfileSamples, params: RegionParams) -> tuple:
    tau = p.tau
    if tau == 0.0:
        raise CoverageError("width laws are undefined at tau = 0")
    scale = math.sqrt(2.0 * abs(tau))
    width_ratio = p.tip / scale
    curvature_ratio = tip_mean_curvature(p) / scale
    return width_ratio, 1.0, abs(width_ratio - 1.0), {
        "curvature_ratio": curvature_ratio,
        "curvature_deviation": abs(curvature_ratio - 0.5),
    }


def verify_region(samples: Sequence[Union[ProfileSamples, TipZoom]], region: str,
                  params: RegionParams = None) -> RegionReport:
    """
    Compare every sample with the law of one region.

    Deviations are |tau| sup |u - ansatz| over rho <= M (parabolic),
    sup |u_bar - ellipse| over sigma in K (intermediate), sup |Z - Z_bowl|
    over s <= S (tip) and |d / sqrt(2|tau|) - 1| (width, with the tip
    curvature ratio and its distance to 1/2 kept as coefficients).

    Ex.

    the exact parabolic ansatz gives beta = 1 and deviation 0

    :param samples: ProfileSamples, or TipZoom for the tip region
    :param region: one of REGIONS
    :param params:
    :return: RegionReport ordered by increasing tau
    """
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}, expected one of {REGIONS}")
    params = params or RegionParams()
    samples = sorted(samples, key=lambda p: p.tau)
    if not samples:
        raise CoverageError(f"no samples for the {region} region")

    bowl = None
    if region == "tip":
        bowl = params.bowl
        if bowl is None:
            sym = params.sym or next((p.sym for p in samples if isinstance(p, ProfileSamples)), None)
            if sym is None:
                raise ValueError("tip comparison of bare zooms needs params.bowl or params.sym")
            bowl = bowl_solve(sym.d, s_max=max(params.S, 10.0))
        if bowl.s_max < params.S:
            raise CoverageError(f"bowl reaches s={bowl.s_max}, comparison needs {params.S}")
    elif any(isinstance(p, TipZoom) for p in samples):
        raise ValueError(f"the {region} region needs ProfileSamples, not tip zooms")

    rows: List[tuple] = []
    for p in samples:
        if region == "parabolic":
            rows.append(_parabolic(p, params))
        elif region == "intermediate":
            rows.append(_intermediate(p, params))
        elif region == "tip":
            rows.append(_tip(p, params, bowl))
        else:
            rows.append(_width(p, params))

    coefficients: Dict[str, list] = {}
    for _, _, _, extra in rows:
        for key, value in extra.items():
            coefficients.setdefault(key, []).append(value)
    domain = {
        "parabolic": {"M": params.M},
        "intermediate": {"sigma_min": params.K[0], "sigma_max": params.K[1]},
        "tip": {"S": params.S},
        "width": {},
    }[region]
    report = RegionReport(
        region=region,
        taus=[p.tau for p in samples],
        measured=[row[0] for row in rows],
        predicted=[row[1] for row in rows],
        deviations=[row[2] for row in rows],
        coefficients=coefficients,
        domain=domain,
    )
    logger.info(
        "[VERIFY] %s region over tau in [%.4g, %.4g]: deviation %.4g",
        region, report.window[0], report.window[1], report.deviation,
    )
    return report


def covered(samples: Sequence[Union[ProfileSamples, TipZoom]], region: str,
            params: RegionParams = None) -> List[Union[ProfileSamples, TipZoom]]:
    """The samples that cover the region's spatial range, in tau order."""
    params = params or RegionParams()
    keep = []
    for p in sorted(samples, key=lambda s: s.tau):
        try:
            if region == "parabolic":
                _parabolic(p, params)
            elif region == "intermediate":
                _intermediate(p, params)
            elif region == "tip":
                _zoom(p, params)
            else:
                _width(p, params)
        except CoverageError:
            continue
        keep.append(p)
    return keep
