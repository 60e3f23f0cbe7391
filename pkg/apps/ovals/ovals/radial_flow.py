"""
Symmetry-reduced mean curvature flow as a forced curve flow in the quarter
plane {(r, y): r >= 0, y >= 0}.

The SO(k) x SO(n+1-k) symmetric hypersurface is generated by a convex curve
from the y-axis to the r-axis. With outward normal nu and curvature kappa > 0
for convex curves the curve moves inward with normal speed

    V = kappa + (k-1) <nu, e_r> / r + (n-k) <nu, e_y> / y,

and in the renormalized frame with V - <x, nu> / 2.
"""
import logging
import math
from collections import namedtuple
from typing import List, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

import ovals.definitions as defs
import ovals.entropy
from ovals.classes import (
    ProfileSamples,
    QuotientCurve,
    StepPolicy,
    StopRule,
    SymmetryClass,
    TipZoom,
)
from ovals.data import RunRecord, TrajectoryRecorder
from ovals.errors import (
    CoverageError,
    DegenerateGeometryError,
    NonTerminationError,
    StepRejectionError,
)

logger = logging.getLogger(__name__)

CurveGeometry = namedtuple(
    "CurveGeometry", ["tangent", "normal", "kappa", "q_r", "q_y", "spacing"]
)

_ARC_TABLE_SIZE = 20001


def init_quarter_ellipse(
    semi_r: float, semi_y: float, sym: SymmetryClass, m: int, t: float = 0.0
) -> QuotientCurve:
    """
    Quarter ellipse r^2/semi_r^2 + y^2/semi_y^2 = 1 with nodes at approximately
    uniform arc length. Every node is placed through the polar parameter, so it
    lies on the quadric to rounding.

    :param semi_r: semi-axis along r
    :param semi_y: semi-axis along y
    :param sym:
    :param m: node count
    :param t: initial time
    :return:
    """
    if m < defs.MIN_NODES:
        raise ValueError(f"need at least {defs.MIN_NODES} nodes, got {m}")
    if not (math.isfinite(semi_r) and math.isfinite(semi_y)) or min(semi_r, semi_y) <= 0.0:
        raise ValueError(f"semi-axes must be positive and finite, got {semi_r}, {semi_y}")

    theta = np.linspace(0.0, 0.5 * math.pi, _ARC_TABLE_SIZE)
    speed = np.hypot(semi_r * np.cos(theta), semi_y * np.sin(theta))
    arc = np.concatenate(([0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(theta))))
    targets = np.linspace(0.0, arc[-1], m)
    theta_nodes = np.interp(targets, arc, theta)
    theta_nodes[0], theta_nodes[-1] = 0.0, 0.5 * math.pi

    nodes = np.column_stack((semi_r * np.sin(theta_nodes), semi_y * np.cos(theta_nodes)))
    nodes[0, 0] = 0.0
    nodes[-1] = (semi_r, 0.0)
    return QuotientCurve(nodes, t, sym)


def init_profile_ellipsoid(ell: float, sym: SymmetryClass, m: int) -> QuotientCurve:
    """
    Quotient curve of the SO(k)-symmetric ellipsoid with a_j = 1/k,
    r^2/(k^2 ell^2) + y^2 = 2(n-k).

    Ex.

    n=3, k=2, ell=5: r-intercept 10 sqrt(2), y-intercept sqrt(2)

    :param ell: scale, positive and finite
    :param sym:
    :param m: node count, m >= 16
    :return:
    """
    if not (isinstance(ell, (int, float)) and math.isfinite(ell) and ell > 0.0):
        raise ValueError(f"ell must be positive and finite, got {ell}")
    radius = sym.cylinder_radius
    return init_quarter_ellipse(sym.k * ell * radius, radius, sym, m)


def init_quarter_circle(radius: float, sym: SymmetryClass, m: int) -> QuotientCurve:
    """Round initial data: the quotient of the sphere of the given radius."""
    return init_quarter_ellipse(radius, radius, sym, m)


def curve_geometry(nodes: np.ndarray, sym: SymmetryClass) -> CurveGeometry:
    """
    Discrete geometry at every node, using odd ghost nodes across both axes.

    Three-point nonuniform stencils give second-order tangents and curvature.
    At the axis endpoints the rotational quotients take their limits: the
    term <nu, e_r>/r at r = 0 and <nu, e_y>/y at y = 0 both equal kappa.

    :param nodes: (m, 2) array
    :param sym:
    :return: CurveGeometry with outward normals and q_r = <nu,e_r>/r, q_y = <nu,e_y>/y
    """
    ghost_first = np.array([-nodes[1, 0], nodes[1, 1]])
    ghost_last = np.array([nodes[-2, 0], -nodes[-2, 1]])
    ext = np.vstack((ghost_first, nodes, ghost_last))

    prev, cur, nxt = ext[:-2], ext[1:-1], ext[2:]
    back, fwd = cur - prev, nxt - cur
    h_minus = np.hypot(back[:, 0], back[:, 1])
    h_plus = np.hypot(fwd[:, 0], fwd[:, 1])
    if np.min(h_minus) <= 0.0 or np.min(h_plus) <= 0.0:
        raise DegenerateGeometryError("consecutive nodes coincide")

    total = h_minus + h_plus
    first = (h_minus / (h_plus * total))[:, None] * fwd + (h_plus / (h_minus * total))[:, None] * back
    tangent = first / np.hypot(first[:, 0], first[:, 1])[:, None]
    second = 2.0 * (fwd / h_plus[:, None] - back / h_minus[:, None]) / total[:, None]
    normal = np.column_stack((-tangent[:, 1], tangent[:, 0]))
    kappa = -np.einsum("ij,ij->i", second, normal)

    r, y = nodes[:, 0], nodes[:, 1]
    if np.any(y[:-1] < defs.Y_FLOOR) or np.any(r[1:] < defs.Y_FLOOR):
        raise DegenerateGeometryError("an off-axis node collapsed onto an axis")
    q_r = np.empty_like(kappa)
    q_y = np.empty_like(kappa)
    q_r[1:] = normal[1:, 0] / r[1:]
    q_r[0] = kappa[0]
    q_y[:-1] = normal[:-1, 1] / y[:-1]
    q_y[-1] = kappa[-1]
    spacing = np.hypot(*np.diff(nodes, axis=0).T)
    return CurveGeometry(tangent, normal, kappa, q_r, q_y, spacing)


def _normal_speed(nodes: np.ndarray, sym: SymmetryClass, frame: str) -> tuple:
    geom = curve_geometry(nodes, sym)
    speed = geom.kappa + (sym.k - 1) * geom.q_r + sym.fiber * geom.q_y
    if frame == defs.FRAME_RENORMALIZED:
        speed = speed - 0.5 * np.einsum("ij,ij->i", nodes, geom.normal)
    return speed, geom


def curve_velocity(c: QuotientCurve) -> np.ndarray:
    """
    Inward normal speed at every node, including the axis endpoints.

    :param c:
    :return: per-node speeds V (V_total in the renormalized frame)
    """
    speed, _ = _normal_speed(c.nodes, c.sym, c.frame)
    return speed


def enclosed_area(c: QuotientCurve) -> float:
    """Area between the curve and the two axes (shoelace about the origin)."""
    r, y = c.r, c.y
    return float(0.5 * np.sum(r[1:] * y[:-1] - r[:-1] * y[1:]))


def roundness(c: QuotientCurve) -> float:
    """max/min distance to the origin, the center of the induced hypersurface."""
    dist = np.hypot(c.r, c.y)
    return float(dist.max() / dist.min())


def tip_curvature(c: QuotientCurve) -> float:
    """Mean curvature of the induced hypersurface at the tip point (d(t), 0)."""
    geom = curve_geometry(c.nodes, c.sym)
    return float(geom.kappa[-1] + (c.sym.k - 1) * geom.q_r[-1] + c.sym.fiber * geom.q_y[-1])


def radius_at_angles(c: QuotientCurve, angles: np.ndarray) -> np.ndarray:
    """
    Distance from the origin to the curve along the rays at polar angle
    atan2(y, r); the curve must be star-shaped about the origin.

    :param c:
    :param angles: polar angles in [0, pi/2]
    :return:
    """
    polar = np.arctan2(c.y, c.r)
    return np.interp(angles, polar[::-1], np.hypot(c.r, c.y)[::-1])


def is_convex(nodes: np.ndarray, tol: float = 0.0) -> bool:
    """True if the turning angle along the polyline is single-signed."""
    seg = np.diff(nodes, axis=0)
    cross = seg[:-1, 0] * seg[1:, 1] - seg[:-1, 1] * seg[1:, 0]
    return bool(np.all(cross <= tol) or np.all(cross >= -tol))


def invariant_violation(nodes: np.ndarray) -> Optional[str]:
    """
    Return a description of the first violated curve invariant, or None.

    :param nodes:
    :return:
    """
    if not np.all(np.isfinite(nodes)):
        return "non-finite node"
    if np.any(nodes[1:, 0] <= 0.0) or np.any(nodes[:-1, 1] <= 0.0):
        return "interior node left the open quarter plane"
    dr, dy = np.diff(nodes[:, 0]), np.diff(nodes[:, 1])
    if np.any(dr < 0.0) or np.any(dy > 0.0):
        return "parametrization lost monotonicity"
    if np.any(np.hypot(dr, dy) <= 0.0):
        return "coincident nodes"
    return None


def _redistribution_weights(nodes: np.ndarray, sym: SymmetryClass, policy: StepPolicy) -> tuple:
    seg = np.hypot(*np.diff(nodes, axis=0).T)
    arc = np.concatenate(([0.0], np.cumsum(seg)))
    mean_spacing = arc[-1] / (nodes.shape[0] - 1)
    kappa = np.abs(curve_geometry(nodes, sym).kappa)
    w = 1.0 + policy.curvature_weight * kappa * mean_spacing
    return seg, arc, w


def needs_redistribution(nodes: np.ndarray, sym: SymmetryClass, policy: StepPolicy) -> bool:
    """Weighted spacing ratio above the trigger, or too few nodes near the tip."""
    seg, arc, w = _redistribution_weights(nodes, sym, policy)
    weighted = seg * 0.5 * (w[1:] + w[:-1])
    if weighted.max() > policy.spacing_ratio * weighted.min():
        return True
    if arc[-1] > policy.tip_arc:
        return int(np.count_nonzero(arc >= arc[-1] - policy.tip_arc)) < policy.tip_floor
    return False


def redistribute(nodes: np.ndarray, sym: SymmetryClass, policy: StepPolicy) -> np.ndarray:
    """
    Resample the curve by monotone cubic interpolation of r(s) and y(s) so
    nodes equidistribute the density 1 + w |kappa| h, with extra density on
    the tip arc when it would hold fewer than `tip_floor` nodes.

    :param nodes:
    :param sym:
    :param policy:
    :return: new (m, 2) node array with the same endpoints
    """
    m = nodes.shape[0]
    seg, arc, w = _redistribution_weights(nodes, sym, policy)
    cumulative = np.concatenate(([0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * seg)))

    length = arc[-1]
    if length > policy.tip_arc:
        tip_start = length - policy.tip_arc
        tip_share = (cumulative[-1] - np.interp(tip_start, arc, cumulative)) / cumulative[-1]
        wanted = policy.tip_floor / (m - 1)
        if tip_share < wanted:
            tip_weight = cumulative[-1] - np.interp(tip_start, arc, cumulative)
            extra = (wanted * cumulative[-1] - tip_weight) / (policy.tip_arc * (1.0 - wanted))
            cumulative = cumulative + extra * np.clip(arc - tip_start, 0.0, None)

    targets = np.linspace(0.0, cumulative[-1], m)
    arc_new = np.interp(targets, cumulative, arc)
    out = np.column_stack(
        (
            PchipInterpolator(arc, nodes[:, 0])(arc_new),
            PchipInterpolator(arc, nodes[:, 1])(arc_new),
        )
    )
    out[0] = (0.0, nodes[0, 1])
    out[-1] = (nodes[-1, 0], 0.0)
    return out


class FlowSolver:
    """
    Single-owner solver state for the quotient curve flow. The curve is
    mutated in place; `snapshot` hands out immutable copies.
    """

    def __init__(self, curve: QuotientCurve, policy: StepPolicy = None):
        self.curve = curve.copy()
        self.policy = policy or StepPolicy()
        self.steps = 0
        self.rejections = 0
        self.redistributions = 0
        self._was_convex = is_convex(self.curve.nodes)
        self.convexity_lost_at: Optional[float] = None

    @property
    def sym(self) -> SymmetryClass:
        return self.curve.sym

    def snapshot(self) -> QuotientCurve:
        return self.curve.frozen()

    def stable_dt(self) -> float:
        """
        c_cfl h_min^2 scaled by 2/D, where D = max(k, n-k+1) is the effective
        dimension of the diffusion at the axis endpoints.

        :return:
        """
        h_min = float(np.min(np.hypot(*np.diff(self.curve.nodes, axis=0).T)))
        dim = max(self.sym.k, self.sym.fiber + 1)
        dt = self.policy.c_cfl * h_min**2 * 2.0 / dim
        if self.policy.dt_max is not None:
            dt = min(dt, self.policy.dt_max)
        return dt

    def _velocity(self, nodes: np.ndarray) -> np.ndarray:
        speed, geom = _normal_speed(nodes, self.sym, self.curve.frame)
        return -speed[:, None] * geom.normal

    def _project(self, nodes: np.ndarray) -> np.ndarray:
        nodes[0, 0] = 0.0
        nodes[-1, 1] = 0.0
        return nodes

    def _heun(self, dt: float) -> np.ndarray:
        nodes = self.curve.nodes
        k1 = self._velocity(nodes)
        stage = self._project(nodes + dt * k1)
        k2 = self._velocity(stage)
        return self._project(nodes + 0.5 * dt * (k1 + k2))

    def step(self, dt_cap: float = None) -> float:
        """
        Advance one explicit two-stage step, halving dt on rejection.

        :param dt_cap: optional upper bound for this step (to land on a stop time)
        :return: the accepted dt
        """
        dt = self.stable_dt()
        if dt_cap is not None:
            dt = min(dt, dt_cap)
        for _ in range(self.policy.max_rejections):
            try:
                candidate = self._heun(dt)
                reason = invariant_violation(candidate)
            except DegenerateGeometryError as err:
                reason = str(err)
            if reason is None:
                break
            self.rejections += 1
            logger.warning("[FLOW] step rejected at t=%.6g (%s), halving dt=%.3g", self.curve.t, reason, dt)
            dt *= 0.5
        else:
            raise StepRejectionError(
                f"{self.policy.max_rejections} rejections at t={self.curve.t}"
            )

        self.curve.nodes[:] = candidate
        if self.curve.frame == defs.FRAME_RENORMALIZED:
            self.curve.tau = (self.curve.tau or 0.0) + dt
            self.curve.t = -math.exp(-self.curve.tau)
        else:
            self.curve.t += dt
        self.steps += 1

        if needs_redistribution(self.curve.nodes, self.sym, self.policy):
            self.curve.nodes[:] = redistribute(self.curve.nodes, self.sym, self.policy)
            self.redistributions += 1

        convex = is_convex(self.curve.nodes)
        if convex:
            self._was_convex = True
        elif self._was_convex and self.convexity_lost_at is None:
            self.convexity_lost_at = self.curve.t
            logger.warning("[FLOW] convexity lost at t=%.6g", self.curve.t)
        return dt

    def run(self, stop: StopRule = None) -> RunRecord:
        """
        Step until the stop rule fires, snapshotting on the size schedule.

        :param stop:
        :return: RunRecord with snapshots, t_ext (extinction rule) and densities
        """
        stop = stop or StopRule()
        record = RunRecord(kind="radial", sym=self.sym, policy=self.policy)
        recorder = TrajectoryRecorder(record, stop.snapshot_fraction, stop.fit_points)
        size0 = enclosed_area(self.curve)
        recorder.record_at_interval(self.curve, size0, force=True)

        while True:
            if self.steps >= stop.max_steps:
                raise NonTerminationError(f"no stop after {stop.max_steps} steps (t={self.curve.t})")
            cap = None
            if stop.kind == "time":
                cap = stop.value - self.curve.t
            self.step(dt_cap=cap)
            size = enclosed_area(self.curve)

            if stop.kind == "extinction" and size <= stop.stop_fraction * size0:
                recorder.record_at_interval(self.curve, size, force=True)
                record.status = defs.STATUS_EXTINCT
                break
            if stop.kind == "time" and self.curve.t >= stop.value * (1.0 - 1e-14):
                recorder.record_at_interval(self.curve, size, force=True)
                record.status = defs.STATUS_TIME_REACHED
                break
            if stop.kind == "density" and stop.t0 is not None:
                if ovals.entropy.curve_density(self.curve, stop.t0) <= stop.value:
                    recorder.record_at_interval(self.curve, size, force=True)
                    record.status = defs.STATUS_DENSITY_REACHED
                    break
            recorder.record_at_interval(self.curve, size)
            if self.steps % defs.LOG_EVERY_STEPS == 0:
                logger.info(
                    "[FLOW] step %d t=%.6g area=%.4g tip=%.4g",
                    self.steps, self.curve.t, size, self.curve.tip,
                )

        record.step_count = self.steps
        record.rejection_count = self.rejections
        record.convexity_lost = self.convexity_lost_at is not None
        record.convexity_lost_at = self.convexity_lost_at
        record.roundness = roundness(record.snapshots[-1])
        record.widths = [(snap.tip,) * self.sym.k for snap in record.snapshots]
        if record.status == defs.STATUS_EXTINCT:
            record.t_ext = recorder.calc_extinction_time()
            record_densities(record)
            logger.info(
                "[FLOW] extinction at t_ext=%.8g after %d steps, roundness %.4f",
                record.t_ext, self.steps, record.roundness,
            )
        if record.convexity_lost:
            logger.warning("[FLOW] run lost convexity at t=%.6g", self.convexity_lost_at)
        return record


def step_flow(c: QuotientCurve, dt_policy: StepPolicy = None) -> QuotientCurve:
    """
    Functional form of one solver step.

    :param c:
    :param dt_policy:
    :return: the advanced curve (the input is left untouched)
    """
    solver = FlowSolver(c, dt_policy)
    solver.step()
    return solver.curve


def run_to_extinction(c: QuotientCurve, policy: StepPolicy = None,
                      stop: StopRule = None) -> RunRecord:
    """
    Run the flow until the enclosed area has collapsed and extrapolate t_ext.

    :param c: valid initial curve
    :param policy:
    :param stop: defaults to the extinction rule
    :return:
    """
    return FlowSolver(c, policy).run(stop or StopRule())


def record_densities(record: RunRecord) -> None:
    """Fill `record.densities` with Theta(t; t_ext) for snapshots before t_ext."""
    record.densities = [
        ovals.entropy.curve_density(snap, record.t_ext) if snap.t < record.t_ext else float("nan")
        for snap in record.snapshots
    ]


def renormalize_curve(curve: QuotientCurve, t_ext: float, tau_shift: float = 0.0) -> QuotientCurve:
    """
    Rescale by lambda = (t_ext - t)^(-1/2) and label with
    tau = -log(t_ext - t) + tau_shift.

    :param curve: unrescaled curve
    :param t_ext: measured extinction time
    :param tau_shift: log(t_ext - t') when the run was entropy normalized
    :return: renormalized curve (t keeps the unrescaled time)
    """
    gap = t_ext - curve.t
    if not gap > 0.0:
        raise ValueError(f"snapshot at t={curve.t} is not before t_ext={t_ext}")
    return QuotientCurve(
        curve.nodes / math.sqrt(gap),
        curve.t,
        curve.sym,
        defs.FRAME_RENORMALIZED,
        -math.log(gap) + tau_shift,
    )


def unrenormalize_curve(curve: QuotientCurve, t_ext: float) -> QuotientCurve:
    """Exact inverse of `renormalize_curve`."""
    gap = t_ext - curve.t
    return QuotientCurve(curve.nodes * math.sqrt(gap), curve.t, curve.sym, defs.FRAME_UNRESCALED)


def sample_charts(curve: QuotientCurve, n_samples: int = 401, slope_max: float = 4.0) -> ProfileSamples:
    """
    Resample a renormalized curve to the graph chart u(rho), on the part with
    |u_rho| <= slope_max, and the inverse chart Y(u), on the part with
    |Y_u| <= slope_max.

    :param curve:
    :param n_samples: points per chart
    :param slope_max:
    :return:
    """
    r, y = curve.r, curve.y
    dr, dy = np.diff(r), np.diff(y)

    steep = np.nonzero(np.abs(dy) > slope_max * dr)[0]
    graph_end = int(steep[0]) if steep.size else r.size - 1
    flat = np.nonzero(np.abs(dr) > slope_max * np.abs(dy))[0]
    inverse_start = int(flat[-1]) + 1 if flat.size else 0
    if graph_end < 2 or inverse_start > r.size - 3:
        raise CoverageError("charts hold fewer than three nodes")

    rho = np.linspace(0.0, r[graph_end], n_samples)
    u = PchipInterpolator(r, y)(rho)
    u_grid = np.linspace(0.0, y[inverse_start], n_samples)
    Y = PchipInterpolator(y[::-1], r[::-1])(u_grid)
    return ProfileSamples(
        rho=rho, u=u, u_grid=u_grid, Y=Y, tau=float(curve.tau), sym=curve.sym, curve=curve, t=curve.t
    )


def renormalize_trajectory(rec: RunRecord, tau_shift: float = 0.0, n_samples: int = 401,
                           drop_fraction: float = 5e-4) -> List[ProfileSamples]:
    """
    Renormalize every snapshot about the measured extinction time and resample
    it to graph and inverse charts.

    Snapshots closer to extinction than drop_fraction * (t_ext - t_first)
    are dropped and reported.

    :param rec: record of a run that reached extinction detection
    :param tau_shift: added to -log(t_ext - t)
    :param n_samples:
    :param drop_fraction:
    :return: ProfileSamples with strictly increasing tau
    """
    if not math.isfinite(rec.t_ext):
        raise ValueError("run has no extinction time")
    t_first = rec.snapshots[0].t
    min_gap = drop_fraction * (rec.t_ext - t_first)
    samples: List[ProfileSamples] = []
    dropped = 0
    for snap in rec.snapshots:
        gap = rec.t_ext - snap.t
        if gap <= min_gap:
            dropped += 1
            continue
        try:
            p = sample_charts(renormalize_curve(snap, rec.t_ext, tau_shift), n_samples)
        except (CoverageError, ValueError) as err:
            logger.warning("[FLOW] dropping snapshot at t=%.6g: %s", snap.t, err)
            dropped += 1
            continue
        if samples and p.tau <= samples[-1].tau:
            dropped += 1
            continue
        p.t_ext = rec.t_ext
        p.scale = 1.0 / math.sqrt(gap)
        samples.append(p)
    if dropped:
        logger.info("[FLOW] dropped %d snapshots during renormalization", dropped)
    rec.summary["dropped_snapshots"] = dropped
    return samples


def chart_mismatch(p: ProfileSamples) -> float:
    """Max |Y(u(rho)) - rho| over the overlap of the two charts."""
    inside = p.u <= p.u_grid[-1]
    if not np.any(inside):
        return 0.0
    back = PchipInterpolator(p.u_grid, p.Y)(p.u[inside])
    return float(np.max(np.abs(back - p.rho[inside])))


def zoom_tip(p: ProfileSamples, s_max: float = defs.DEFAULT_S, n_samples: int = 201) -> TipZoom:
    """
    Z(s) = |tau|^(1/2) (Y(|tau|^(-1/2) s) - Y(0)) on s in [0, s_max].

    :param p: samples with an inverse chart
    :param s_max:
    :param n_samples:
    :return:
    """
    if p.tau == 0.0:
        raise CoverageError("tip zoom is undefined at tau = 0")
    root = math.sqrt(abs(p.tau))
    u_top = s_max / root
    if u_top > p.u_grid[-1]:
        raise CoverageError(
            f"inverse chart reaches u={p.u_grid[-1]:.4g}, zoom needs {u_top:.4g}"
        )
    if p.inverse_node_count(u_top) < defs.TIP_NODE_FLOOR:
        raise CoverageError(f"tip chart has fewer than {defs.TIP_NODE_FLOOR} samples")
    s = np.linspace(0.0, s_max, n_samples)
    inverse = PchipInterpolator(p.u_grid, p.Y)
    Z = root * (inverse(s / root) - p.Y[0])
    Z[0] = 0.0
    return TipZoom(s=s, Z=Z, tau=p.tau)
