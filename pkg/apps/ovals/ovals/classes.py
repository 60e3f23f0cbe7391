"""Classes Module"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

import ovals.definitions as defs
import ovals.helpers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymmetryClass:
    """
    The pair (n, k): hypersurface dimension and number of long directions.

    The induced hypersurface is SO(k) x SO(n+1-k) symmetric. k = 1 is
    accepted for regression tests.
    """

    n: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.k, int)):
            raise ValueError(f"n and k must be integers, got {self.n!r}, {self.k!r}")
        if self.k < 1 or self.n - self.k < 1:
            raise ValueError(f"need 1 <= k <= n-1, got n={self.n}, k={self.k}")

    @property
    def d(self) -> int:
        """Dimension of the rotated fiber plus one, n + 1 - k."""
        return self.n + 1 - self.k

    @property
    def fiber(self) -> int:
        """Multiplicity n - k of the fiber curvature."""
        return self.n - self.k

    @property
    def cylinder_radius(self) -> float:
        """Radius sqrt(2(n-k)) of the shrinking cylinder R^k x S^(n-k) at time -1."""
        return math.sqrt(2.0 * (self.n - self.k))


@dataclass
class QuotientCurve:
    """
    Lagrangian polyline in the quarter plane {r >= 0, y >= 0}.

    Node 0 sits on the y-axis, the last node on the r-axis; r increases and
    y decreases along the nodes. `t` is always unrescaled time; curves in the
    renormalized frame also carry `tau`.
    """

    nodes: np.ndarray
    t: float
    sym: SymmetryClass
    frame: str = defs.FRAME_UNRESCALED
    tau: Optional[float] = None

    def __post_init__(self):
        self.nodes = np.array(self.nodes, dtype=float)
        self.validate()

    def validate(self) -> None:
        """Reject curves that can not be a solver state."""
        nodes = self.nodes
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError(f"nodes must have shape (m, 2), got {nodes.shape}")
        if nodes.shape[0] < defs.MIN_NODES:
            raise ValueError(
                f"need at least {defs.MIN_NODES} nodes, got {nodes.shape[0]}"
            )
        if not np.all(np.isfinite(nodes)):
            raise ValueError("non-finite node coordinates")
        if self.frame not in (defs.FRAME_UNRESCALED, defs.FRAME_RENORMALIZED):
            raise ValueError(f"unknown frame {self.frame!r}")
        if abs(nodes[0, 0]) > defs.AXIS_TOLERANCE or abs(nodes[-1, 1]) > defs.AXIS_TOLERANCE:
            raise ValueError("endpoints must lie on the axes")
        dr, dy = np.diff(nodes[:, 0]), np.diff(nodes[:, 1])
        if np.any(dr < 0.0) or np.any(dy > 0.0) or np.any((dr == 0.0) & (dy == 0.0)):
            raise ValueError("non-monotone parametrization")

    @property
    def m(self) -> int:
        return self.nodes.shape[0]

    @property
    def r(self) -> np.ndarray:
        return self.nodes[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.nodes[:, 1]

    @property
    def tip(self) -> float:
        """The tip abscissa d(t)."""
        return float(self.nodes[-1, 0])

    def copy(self) -> "QuotientCurve":
        return QuotientCurve(self.nodes.copy(), self.t, self.sym, self.frame, self.tau)

    def frozen(self) -> "QuotientCurve":
        """Immutable value copy, safe to share across threads."""
        out = self.copy()
        out.nodes.flags.writeable = False
        return out


@dataclass
class ProfileSamples:
    """
    Renormalized snapshot resampled to the graph chart u(rho) and the inverse
    chart Y(u) near the tip.

    `curve` keeps the rescaled polyline the charts were taken from.
    """

    rho: np.ndarray
    u: np.ndarray
    u_grid: np.ndarray
    Y: np.ndarray
    tau: float
    sym: SymmetryClass
    curve: Optional[QuotientCurve] = None
    t: float = float("nan")
    t_ext: float = float("nan")
    scale: float = 1.0

    @property
    def tip(self) -> float:
        """Renormalized tip abscissa, Y(0)."""
        return self.curve.tip if self.curve is not None else float(self.Y[0])

    def u_at(self, rho: np.ndarray) -> np.ndarray:
        """Profile u(rho) from the whole polyline (valid up to the tip), nan outside."""
        if self.curve is None:
            return PchipInterpolator(self.rho, self.u, extrapolate=False)(rho)
        nodes = self.curve.nodes
        return PchipInterpolator(nodes[:, 0], nodes[:, 1], extrapolate=False)(rho)

    def Y_at(self, u: np.ndarray) -> np.ndarray:
        """Inverse profile Y(u) from the whole polyline, nan outside."""
        if self.curve is None:
            return PchipInterpolator(self.u_grid, self.Y, extrapolate=False)(u)
        nodes = self.curve.nodes[::-1]
        return PchipInterpolator(nodes[:, 1], nodes[:, 0], extrapolate=False)(u)

    def inverse_node_count(self, u_max: float) -> int:
        """Number of data points of the tip chart with 0 <= u <= u_max."""
        if self.curve is None:
            return int(np.count_nonzero(self.u_grid <= u_max))
        return int(np.count_nonzero(self.curve.y <= u_max))


@dataclass
class TipZoom:
    """Zoomed tip function Z(s) = |tau|^(1/2) (Y(|tau|^(-1/2) s) - Y(0))."""

    s: np.ndarray
    Z: np.ndarray
    tau: float


@dataclass(frozen=True)
class StepPolicy:
    """Time-step and node-management policy shared by both flow solvers."""

    c_cfl: float = defs.DEFAULT_CFL
    max_rejections: int = defs.MAX_REJECTIONS
    spacing_ratio: float = defs.SPACING_RATIO_TRIGGER
    tip_floor: int = defs.TIP_NODE_FLOOR
    tip_arc: float = defs.TIP_ARC
    curvature_weight: float = defs.CURVATURE_WEIGHT
    dt_max: Optional[float] = None

    def __post_init__(self):
        if not self.c_cfl > 0.0:
            raise ValueError(f"c_cfl must be positive, got {self.c_cfl}")


@dataclass(frozen=True)
class StopRule:
    """
    When a run ends and how it is sampled.

    kind is one of "extinction", "time" or "density". For "extinction" the
    run stops once the size measure (enclosed area, or mean squared radius
    for surfaces) falls below `stop_fraction` of its initial value.
    """

    kind: str = "extinction"
    value: Optional[float] = None
    stop_fraction: float = defs.DEFAULT_STOP_AREA_FRACTION
    snapshot_fraction: float = defs.DEFAULT_SNAPSHOT_FRACTION
    fit_points: int = defs.DEFAULT_FIT_POINTS
    max_steps: int = defs.DEFAULT_MAX_STEPS
    t0: Optional[float] = None  # center time for the density rule

    def __post_init__(self):
        if self.kind not in ("extinction", "time", "density"):
            raise ValueError(f"unknown stop rule {self.kind!r}")
        if self.kind != "extinction" and self.value is None:
            raise ValueError(f"stop rule {self.kind!r} needs a value")
        if self.kind == "density" and self.t0 is None:
            raise ValueError("density stop rule needs a center time t0")


@dataclass
class EllipsoidParams:
    """Scale ell and simplex point (a1, 1 - a1), a1 clamped to [delta, 1 - delta]."""

    ell: float
    a1: float
    delta: float = defs.DELTA_CLAMP

    def __post_init__(self):
        if not (math.isfinite(self.ell) and self.ell > 0.0):
            raise ValueError(f"ell must be positive and finite, got {self.ell}")
        clamped = ovals.helpers.clamp(self.a1, self.delta, 1.0 - self.delta)
        if clamped != self.a1:
            logger.warning("[ANISO] a1=%s clamped to %s", self.a1, clamped)
        self.a1 = clamped

    @property
    def a(self) -> Tuple[float, float]:
        return self.a1, 1.0 - self.a1


@dataclass
class RadialSurface:
    """
    Radius function on the quarter sphere for the k = 2 quotient surface in
    (x1, x2, x3 = |x''|) space.

    The octant of directions is covered by three gnomonic patches, patch c
    being the directions whose c-th coordinate is largest; `r` has shape
    (3, N, N) with cell-centered nodes on each patch. A node with unit
    direction w sits at X = r (scale * w), so `scale` holds the semi-axes of
    the reference ellipsoid the grid is fitted to.
    """

    r: np.ndarray
    t: float
    sym: SymmetryClass
    scale: Tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        self.r = np.array(self.r, dtype=float)
        if self.sym.k != 2:
            raise ValueError(f"radial surfaces represent k = 2 quotients, got k={self.sym.k}")
        if self.r.ndim != 3 or self.r.shape[0] != 3 or self.r.shape[1] != self.r.shape[2]:
            raise ValueError(f"r must have shape (3, N, N), got {self.r.shape}")
        if not np.all(np.isfinite(self.r)) or np.any(self.r <= 0.0):
            raise ValueError("radius values must be positive and finite")
        self.scale = tuple(float(v) for v in self.scale)
        if len(self.scale) != 3 or any(not v > 0.0 for v in self.scale):
            raise ValueError(f"scale must be three positive semi-axes, got {self.scale}")

    @property
    def patch_size(self) -> int:
        return self.r.shape[1]

    def copy(self) -> "RadialSurface":
        return RadialSurface(self.r.copy(), self.t, self.sym, self.scale)

    def frozen(self) -> "RadialSurface":
        out = self.copy()
        out.r.flags.writeable = False
        return out


@dataclass
class NormalizedRun:
    """Entropy-normalized run: t', lambda and the widths at rescaled time -1."""

    t_ext: float
    t_prime: float
    lam: float
    widths: Tuple[float, ...]
    density_target: float = float("nan")
    mu: Tuple[float, ...] = field(default=())
    surface: Optional[RadialSurface] = None  # flow at t', before rescaling

    def __post_init__(self):
        if not self.t_prime < self.t_ext:
            raise ValueError(f"t_prime={self.t_prime} must precede t_ext={self.t_ext}")
        if any(not w > 0.0 for w in self.widths):
            raise ValueError(f"widths must be positive, got {self.widths}")

    @property
    def tau_shift(self) -> float:
        """log(t_ext - t'): offset turning -log(t_ext - t) into the normalized tau."""
        return math.log(self.t_ext - self.t_prime)
