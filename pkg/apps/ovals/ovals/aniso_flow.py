"""
Forced mean curvature flow of the k = 2 quotient surface in (x1, x2, x3)
space, x3 = |x''|, for anisotropic ellipsoids.

The quotient surface moves inward with normal speed

    V = H_Sigma + (n-2) <e3, nu> / x3

and is stored as a graph X = r(w) (scale * w) over the octant of unit
directions w, which is covered by three gnomonic patches. Ghost values come
from reflection across the coordinate planes and cubic-spline transfer
across patch seams; the even reflection across x3 = 0 makes <e3, nu> odd,
so <e3, nu>/x3 stays finite at the cell centers next to the equator.
"""
import functools
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.optimize import bisect

import ovals.definitions as defs
import ovals.entropy
import ovals.helpers
import ovals.radial_flow
from ovals.classes import EllipsoidParams, NormalizedRun, RadialSurface, StepPolicy, StopRule, SymmetryClass
from ovals.data import RunRecord, TrajectoryRecorder
from ovals.errors import (
    DegenerateGeometryError,
    NonTerminationError,
    NumericalError,
    StepRejectionError,
    TargetOutOfRangeError,
)
from ovals.runner import SweepRunner

logger = logging.getLogger(__name__)

# (c, a, b): patch c uses w ~ e_c + p e_a + q e_b with e_a x e_b = e_c
PATCH_AXES = ((0, 1, 2), (1, 2, 0), (2, 0, 1))

REFIT_RATIO = 1.25  # refit the reference ellipsoid once an axis drifts by this factor

# matched times of the cross-solver comparison, as fractions of the radial t_ext
CROSS_SOLVER_FRACTIONS = (0.25, 0.5, 0.75)

SurfaceGeometry = namedtuple(
    "SurfaceGeometry", ["X", "normal", "H", "K", "fiber", "support", "area", "E", "G"]
)


@dataclass(frozen=True)
class PatchGrid:
    """
    Per-resolution data shared by every surface with N x N cells per patch:
    unit directions and their analytic derivatives in the patch coordinates,
    and the seam/reflection transfer for the ghost layer.
    """

    N: int
    h: float
    w: np.ndarray
    w_p: np.ndarray
    w_q: np.ndarray
    w_pp: np.ndarray
    w_pq: np.ndarray
    w_qq: np.ndarray
    ghost_dest: tuple = field(repr=False)
    ghost_source: tuple = field(repr=False)

    def pad(self, r: np.ndarray) -> np.ndarray:
        """(3, N+2, N+2) array with the ghost layer filled."""
        N = self.N
        padded = np.empty((3, N + 2, N + 2))
        padded[:, 1:-1, 1:-1] = r
        for c in range(3):
            wx, wy = self.ghost_source[c]
            if wx.shape[0] == 0:
                continue
            values = np.einsum("mi,ij,mj->m", wx, r[c], wy)
            pc, pi, pj = self.ghost_dest[c]
            padded[pc, pi, pj] = values
        return padded

    def interpolate(self, r: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """Radius values at arbitrary directions (any octant, by reflection)."""
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        patch, x, y = locate(directions)
        out = np.empty(directions.shape[0])
        for c in range(3):
            mask = patch == c
            if np.any(mask):
                out[mask] = np.einsum(
                    "mi,ij,mj->m", spline_weights(self.N, x[mask]), r[c], spline_weights(self.N, y[mask])
                )
        return out


@functools.lru_cache(maxsize=4)
def _basis_spline(N: int):
    h = 1.0 / N
    nodes = (np.arange(N + 1) - 0.5) * h
    return make_interp_spline(nodes, np.eye(N + 1), k=3)


def spline_weights(N: int, x: np.ndarray) -> np.ndarray:
    """Cubic-spline interpolation weights onto the N patch nodes at local coordinates x."""
    raw = _basis_spline(N)(np.asarray(x, dtype=float))
    out = raw[:, 1:].copy()
    out[:, 0] += raw[:, 0]  # reflected node
    return out


def locate(directions: np.ndarray) -> tuple:
    """
    Patch index and local coordinates of directions, reflected into the
    positive octant.

    :param directions: (M, 3)
    :return: (patch, x, y)
    """
    av = np.abs(directions)
    patch = np.argmax(av, axis=1)
    rows = np.arange(av.shape[0])
    top = av[rows, patch]
    x = av[rows, (patch + 1) % 3] / top
    y = av[rows, (patch + 2) % 3] / top
    return patch, x, y


def _direction_derivatives(c: int, P: np.ndarray, Q: np.ndarray) -> tuple:
    _, a, b = PATCH_AXES[c]
    v = np.zeros(P.shape + (3,))
    v[..., c] = 1.0
    v[..., a] = P
    v[..., b] = Q
    ea = np.zeros(3)
    ea[a] = 1.0
    eb = np.zeros(3)
    eb[b] = 1.0
    s = np.sqrt(np.sum(v * v, axis=-1))[..., None]
    p, q = P[..., None], Q[..., None]
    w = v / s
    w_p = ea / s - v * p / s**3
    w_q = eb / s - v * q / s**3
    w_pp = -2.0 * ea * p / s**3 - v / s**3 + 3.0 * v * p**2 / s**5
    w_qq = -2.0 * eb * q / s**3 - v / s**3 + 3.0 * v * q**2 / s**5
    w_pq = -ea * q / s**3 - eb * p / s**3 + 3.0 * v * p * q / s**5
    return w, w_p, w_q, w_pp, w_pq, w_qq


@functools.lru_cache(maxsize=4)
def patch_grid(N: int) -> PatchGrid:
    """
    Build (and cache) the patch data for N cells per side.

    :param N: cells per patch side, N >= MIN_GRID / 2
    :return:
    """
    if N < defs.MIN_GRID // 2:
        raise ValueError(f"need at least {defs.MIN_GRID // 2} cells per patch, got {N}")
    h = 1.0 / N
    centers = (np.arange(N) + 0.5) * h
    P, Q = np.meshgrid(centers, centers, indexing="ij")
    parts = [_direction_derivatives(c, P, Q) for c in range(3)]
    stacked = [np.stack([part[i] for part in parts]) for i in range(6)]
    for arr in stacked:
        arr.flags.writeable = False

    # ghost layer: padded index i <-> local coordinate (i - 1/2) h
    padded = (np.arange(N + 2) - 0.5) * h
    border = [(i, j) for i in range(N + 2) for j in range(N + 2)
              if i in (0, N + 1) or j in (0, N + 1)]
    dest, dirs = [], []
    for c in range(3):
        _, a, b = PATCH_AXES[c]
        for i, j in border:
            v = np.zeros(3)
            v[c], v[a], v[b] = 1.0, padded[i], padded[j]
            dest.append((c, i, j))
            dirs.append(v)
    dest = np.array(dest)
    source, x, y = locate(np.array(dirs))

    ghost_dest, ghost_source = [], []
    for c in range(3):
        mask = source == c
        ghost_dest.append(tuple(dest[mask].T))
        ghost_source.append((spline_weights(N, x[mask]), spline_weights(N, y[mask])))
    grid = PatchGrid(N, h, *stacked, ghost_dest=tuple(ghost_dest), ghost_source=tuple(ghost_source))
    logger.debug("[ANISO] patch grid N=%d with %d ghost cells", N, dest.shape[0])
    return grid


def _grid_for(grid: int) -> PatchGrid:
    if grid < defs.MIN_GRID or grid % 2:
        raise ValueError(f"grid must be even and >= {defs.MIN_GRID}, got {grid}")
    return patch_grid(grid // 2)


def ellipsoid_axes(p: EllipsoidParams, sym: SymmetryClass) -> tuple:
    """Semi-axes (ell R/a1, ell R/a2, R) of the quotient ellipsoid, R = sqrt(2(n-2))."""
    radius = math.sqrt(2.0 * (sym.n - 2))
    return p.ell * radius / p.a[0], p.ell * radius / p.a[1], radius


def init_quotient_ellipsoid(p: EllipsoidParams, sym: SymmetryClass, grid: int = 64,
                            t: float = 0.0) -> RadialSurface:
    """
    Quotient ellipsoid, with r solved from the quadric at every node.

    :param p:
    :param sym: k = 2 and n >= 3
    :param grid: even, >= 32; each patch gets grid/2 cells per side
    :param t:
    :return:
    """
    if sym.k != 2:
        raise ValueError(f"anisotropic flow is built for k = 2, got k={sym.k}")
    axes = ellipsoid_axes(p, sym)
    return _quadric_surface(axes, axes, sym, _grid_for(grid), t)


def init_round_surface(radius: float, sym: SymmetryClass, grid: int = 64, t: float = 0.0) -> RadialSurface:
    """Round sphere of the given radius; its flow is the shrinking S^n."""
    if sym.k != 2:
        raise ValueError(f"anisotropic flow is built for k = 2, got k={sym.k}")
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    return _quadric_surface((radius,) * 3, (radius,) * 3, sym, _grid_for(grid), t)


def _quadric_surface(axes, scale, sym, grid: PatchGrid, t: float) -> RadialSurface:
    g = grid.w * np.asarray(scale)
    r = 1.0 / np.sqrt(np.sum((g / np.asarray(axes)) ** 2, axis=-1))
    return RadialSurface(r, t, sym, tuple(scale))


def quadric_residual(s: RadialSurface, axes: Sequence[float]) -> float:
    """max |sum x_i^2 / A_i^2 - 1| over the nodes."""
    X = node_positions(s)
    return float(np.max(np.abs(np.sum((X / np.asarray(axes)) ** 2, axis=-1) - 1.0)))


def node_positions(s: RadialSurface) -> np.ndarray:
    grid = patch_grid(s.patch_size)
    return s.r[..., None] * grid.w * np.asarray(s.scale)


def node_angles(s: RadialSurface) -> tuple:
    """Spherical angles per node: theta = atan2(x2, x1), phi = angle from the x3-axis."""
    X = node_positions(s)
    theta = np.arctan2(X[..., 1], X[..., 0])
    phi = np.arccos(np.clip(X[..., 2] / np.linalg.norm(X, axis=-1), -1.0, 1.0))
    return theta, phi


def surface_geometry(s: RadialSurface) -> SurfaceGeometry:
    """
    Positions, outward normals, H and K of the quotient surface, the fiber
    curvature <e3, nu>/x3, the support <g, nu> of the graph direction and
    the cell areas.
    """
    return _geometry(s.r, s.scale, patch_grid(s.patch_size))


def _geometry(r_nodes: np.ndarray, scale: tuple, grid: PatchGrid) -> SurfaceGeometry:
    h = grid.h
    D = np.asarray(scale)
    P = grid.pad(r_nodes)
    r = P[:, 1:-1, 1:-1][..., None]
    r_p = ((P[:, 2:, 1:-1] - P[:, :-2, 1:-1]) / (2.0 * h))[..., None]
    r_q = ((P[:, 1:-1, 2:] - P[:, 1:-1, :-2]) / (2.0 * h))[..., None]
    r_pp = ((P[:, 2:, 1:-1] - 2.0 * P[:, 1:-1, 1:-1] + P[:, :-2, 1:-1]) / h**2)[..., None]
    r_qq = ((P[:, 1:-1, 2:] - 2.0 * P[:, 1:-1, 1:-1] + P[:, 1:-1, :-2]) / h**2)[..., None]
    r_pq = ((P[:, 2:, 2:] - P[:, 2:, :-2] - P[:, :-2, 2:] + P[:, :-2, :-2]) / (4.0 * h**2))[..., None]

    g, g_p, g_q = grid.w * D, grid.w_p * D, grid.w_q * D
    g_pp, g_pq, g_qq = grid.w_pp * D, grid.w_pq * D, grid.w_qq * D
    X = r * g
    X_p = r_p * g + r * g_p
    X_q = r_q * g + r * g_q
    X_pp = r_pp * g + 2.0 * r_p * g_p + r * g_pp
    X_qq = r_qq * g + 2.0 * r_q * g_q + r * g_qq
    X_pq = r_pq * g + r_p * g_q + r_q * g_p + r * g_pq

    cross = np.cross(X_p, X_q)
    jac = np.linalg.norm(cross, axis=-1)
    if np.any(~np.isfinite(jac)) or np.any(jac <= 0.0):
        raise DegenerateGeometryError("degenerate surface element")
    nu = cross / jac[..., None]
    E = np.sum(X_p * X_p, axis=-1)
    F = np.sum(X_p * X_q, axis=-1)
    G = np.sum(X_q * X_q, axis=-1)
    L = np.sum(X_pp * nu, axis=-1)
    M = np.sum(X_pq * nu, axis=-1)
    N = np.sum(X_qq * nu, axis=-1)
    det = E * G - F**2
    H = -(E * N - 2.0 * F * M + G * L) / det
    K = (L * N - M**2) / det
    fiber = nu[..., 2] / X[..., 2]
    support = np.sum(g * nu, axis=-1)
    return SurfaceGeometry(X, nu, H, K, fiber, support, jac * h**2, E, G)


def normal_speed(s: RadialSurface, geom: SurfaceGeometry = None) -> np.ndarray:
    geom = geom or surface_geometry(s)
    return geom.H + (s.sym.n - 2) * geom.fiber


def mean_square_radius(s: RadialSurface) -> float:
    """Size measure: mean |X|^2 over the nodes (linear in t for round spheres)."""
    return float(np.mean(np.sum(node_positions(s) ** 2, axis=-1)))


def radius_along(s: RadialSurface, directions: np.ndarray) -> np.ndarray:
    """
    Distance from the origin to the surface along each physical direction.

    :param s:
    :param directions: (M, 3), any octant, need not be normalized
    :return: (M,)
    """
    scale = np.asarray(s.scale)
    source = np.atleast_2d(np.asarray(directions, dtype=float)) / scale
    source /= np.linalg.norm(source, axis=-1, keepdims=True)
    grid = patch_grid(s.patch_size)
    return grid.interpolate(s.r, source) * np.linalg.norm(source * scale, axis=-1)


def axis_radius(s: RadialSurface, j: int) -> float:
    """Distance from the origin to the surface along e_j."""
    direction = np.zeros((1, 3))
    direction[0, j] = 1.0
    return float(radius_along(s, direction)[0])


def is_convex_surface(s: RadialSurface, geom: SurfaceGeometry = None) -> bool:
    geom = geom or surface_geometry(s)
    return bool(np.all(geom.K > 0.0) and np.all(geom.H > 0.0))


def three_convexity(s: RadialSurface, geom: SurfaceGeometry = None) -> float:
    """
    min over nodes of (lambda_1 + lambda_2 + lambda_3) / H for the induced
    hypersurface, whose principal curvatures are the two of the quotient
    surface and <e3, nu>/x3 with multiplicity n - 2.
    """
    geom = geom or surface_geometry(s)
    n = s.sym.n
    disc = np.sqrt(np.clip(geom.H**2 - 4.0 * geom.K, 0.0, None))
    curvatures = [0.5 * (geom.H - disc), 0.5 * (geom.H + disc)] + [geom.fiber] * (n - 2)
    ordered = np.sort(np.stack(curvatures), axis=0)
    total = np.sum(ordered, axis=0)
    return float(np.min(np.sum(ordered[: min(3, n)], axis=0) / total))


def huisken_density(s: RadialSurface, t0: float) -> float:
    """
    Gaussian density of the induced hypersurface centered at the origin and
    time t0, by the midpoint rule over the cells:

        Theta = 4 |S^(n-2)| sum x3^(n-2) (4 pi (t0-t))^(-n/2) e^(-|x|^2 / 4(t0-t)) dA

    :param s: surface at time s.t
    :param t0: t0 > s.t
    :return:
    """
    lag = t0 - s.t
    if not lag > 0.0:
        raise ValueError(f"density needs t < t0, got t={s.t}, t0={t0}")
    n = s.sym.n
    geom = surface_geometry(s)
    X = geom.X
    kernel = ovals.entropy.gaussian_kernel(np.sum(X * X, axis=-1), n, lag)
    weight = ovals.helpers.sphere_area(n - 2) * X[..., 2] ** (n - 2)
    return float(4.0 * np.sum(kernel * weight * geom.area))


class AnisoSolver:
    """
    Single-owner solver for the radial-graph surface flow, with the step
    rejection policy of the curve solver. The reference ellipsoid of the
    parametrization is refitted whenever the axis extents drift.
    """

    def __init__(self, surface: RadialSurface, policy: StepPolicy = None):
        if surface.sym.k != 2:
            raise ValueError(f"anisotropic flow is built for k = 2, got k={surface.sym.k}")
        self.surface = surface.copy()
        self.policy = policy or StepPolicy()
        self.grid = patch_grid(surface.patch_size)
        self.steps = 0
        self.rejections = 0
        self.refits = 0
        self._geom = surface_geometry(self.surface)
        self._was_convex = is_convex_surface(self.surface, self._geom)
        self.convexity_lost_at: Optional[float] = None

    @property
    def sym(self) -> SymmetryClass:
        return self.surface.sym

    def stable_dt(self, geom: SurfaceGeometry = None) -> float:
        """c_cfl h_phys^2 / n with h_phys the smallest physical cell side."""
        geom = geom or self._geom
        h_phys = self.grid.h * math.sqrt(float(min(geom.E.min(), geom.G.min())))
        dt = self.policy.c_cfl * h_phys**2 / self.sym.n
        if self.policy.dt_max is not None:
            dt = min(dt, self.policy.dt_max)
        return dt

    def _rate(self, r: np.ndarray) -> np.ndarray:
        geom = _geometry(r, self.surface.scale, self.grid)
        if np.any(geom.support <= 0.0):
            raise DegenerateGeometryError("surface is no longer a radial graph")
        return -(geom.H + (self.sym.n - 2) * geom.fiber) / geom.support

    def _heun(self, dt: float) -> np.ndarray:
        r = self.surface.r
        k1 = self._rate(r)
        k2 = self._rate(r + dt * k1)
        return r + 0.5 * dt * (k1 + k2)

    def step(self, dt_cap: float = None) -> float:
        """
        One explicit two-stage step, halving dt on rejection.

        :param dt_cap: optional bound to land on a stop time
        :return: the accepted dt
        """
        dt = self.stable_dt()
        if dt_cap is not None:
            dt = min(dt, dt_cap)
        for _ in range(self.policy.max_rejections):
            try:
                candidate = self._heun(dt)
                reason = None
                if not np.all(np.isfinite(candidate)) or np.any(candidate <= 0.0):
                    reason = "non-positive radius"
            except DegenerateGeometryError as err:
                reason = str(err)
            if reason is None:
                break
            self.rejections += 1
            logger.warning("[ANISO] step rejected at t=%.6g (%s), halving dt=%.3g", self.surface.t, reason, dt)
            dt *= 0.5
        else:
            raise StepRejectionError(f"{self.policy.max_rejections} rejections at t={self.surface.t}")

        self.surface.r[:] = candidate
        self.surface.t += dt
        self.steps += 1
        self._maybe_refit()

        geom = self._geom = surface_geometry(self.surface)
        if is_convex_surface(self.surface, geom):
            self._was_convex = True
        elif self._was_convex and self.convexity_lost_at is None:
            self.convexity_lost_at = self.surface.t
            logger.warning("[ANISO] convexity lost at t=%.6g", self.surface.t)
        return dt

    def _maybe_refit(self) -> None:
        extents = np.array([axis_radius(self.surface, j) for j in range(3)])
        drift = np.log(extents / np.asarray(self.surface.scale))
        if np.max(np.abs(drift - drift.mean())) <= math.log(REFIT_RATIO):
            return
        self.surface = refit_surface(self.surface, tuple(extents))
        self.refits += 1
        logger.debug("[ANISO] refit %d at t=%.6g, axes %s", self.refits, self.surface.t, extents)

    def run(self, stop: StopRule = None) -> RunRecord:
        """
        Step until the stop rule fires, snapshotting on the size schedule.

        :param stop:
        :return: RunRecord with t_ext, densities and axis widths
        """
        stop = stop or StopRule()
        record = RunRecord(kind="aniso", sym=self.sym, policy=self.policy)
        recorder = TrajectoryRecorder(record, stop.snapshot_fraction, stop.fit_points)
        size0 = mean_square_radius(self.surface)
        recorder.record_at_interval(self.surface, size0, force=True)

        while True:
            if self.steps >= stop.max_steps:
                raise NonTerminationError(f"no stop after {stop.max_steps} steps (t={self.surface.t})")
            cap = stop.value - self.surface.t if stop.kind == "time" else None
            self.step(dt_cap=cap)
            size = mean_square_radius(self.surface)

            if stop.kind == "extinction" and size <= stop.stop_fraction * size0:
                recorder.record_at_interval(self.surface, size, force=True)
                record.status = defs.STATUS_EXTINCT
                break
            if stop.kind == "time" and self.surface.t >= stop.value * (1.0 - 1e-14):
                recorder.record_at_interval(self.surface, size, force=True)
                record.status = defs.STATUS_TIME_REACHED
                break
            if stop.kind == "density" and huisken_density(self.surface, stop.t0) <= stop.value:
                recorder.record_at_interval(self.surface, size, force=True)
                record.status = defs.STATUS_DENSITY_REACHED
                break
            recorder.record_at_interval(self.surface, size)
            if self.steps % defs.LOG_EVERY_STEPS == 0:
                logger.info("[ANISO] step %d t=%.6g size=%.4g", self.steps, self.surface.t, size)

        record.step_count = self.steps
        record.rejection_count = self.rejections
        record.convexity_lost = self.convexity_lost_at is not None
        record.convexity_lost_at = self.convexity_lost_at
        record.widths = [(axis_radius(snap, 0), axis_radius(snap, 1)) for snap in record.snapshots]
        record.summary["refits"] = self.refits
        record.monitors["three_convexity"] = [three_convexity(snap) for snap in record.snapshots]
        record.summary["three_convexity_min"] = min(record.monitors["three_convexity"])
        if record.status == defs.STATUS_EXTINCT:
            record.t_ext = recorder.calc_extinction_time()
            record.densities = [
                huisken_density(snap, record.t_ext) if snap.t < record.t_ext else float("nan")
                for snap in record.snapshots
            ]
            finite = [d for d in record.densities if math.isfinite(d)]
            record.checks["density_monotone"] = ovals.entropy.density_monotone(finite)
            logger.info("[ANISO] extinction at t_ext=%.8g after %d steps", record.t_ext, self.steps)
        return record


def refit_surface(s: RadialSurface, scale: tuple) -> RadialSurface:
    """
    Resample `s` onto the parametrization with reference semi-axes `scale`;
    the represented surface is unchanged up to interpolation.
    """
    grid = patch_grid(s.patch_size)
    old, new = np.asarray(s.scale), np.asarray(scale)
    target = grid.w * new  # graph directions of the new nodes
    source = (target / old).reshape(-1, 3)
    source /= np.linalg.norm(source, axis=-1, keepdims=True)
    r_old = grid.interpolate(s.r, source)
    reach = r_old * np.linalg.norm(source * old, axis=-1)
    r_new = reach / np.linalg.norm(target.reshape(-1, 3), axis=-1)
    return RadialSurface(r_new.reshape(s.r.shape), s.t, s.sym, tuple(scale))


def step_aniso(s: RadialSurface, policy: StepPolicy = None) -> RadialSurface:
    """Functional form of one solver step."""
    solver = AnisoSolver(s, policy)
    solver.step()
    return solver.surface


def run_aniso(s: RadialSurface, until: StopRule = None, policy: StepPolicy = None) -> RunRecord:
    """
    Flow the surface until the stop rule (extinction by default).

    :param s:
    :param until:
    :param policy:
    :return:
    """
    return AnisoSolver(s, policy).run(until or StopRule())


def cross_solver_agreement(ell: float, sym: SymmetryClass, grid: int = 64, m: int = 256,
                           policy: StepPolicy = None, stop: StopRule = None, angles: int = 17) -> dict:
    """
    Flow the ell-ellipsoid at a1 = 1/2, which is symmetric about the x3-axis,
    with the surface solver and with the curve solver, and compare the
    extinction times and the profiles in the (x1, x3) plane at matched times.

    :param ell:
    :param sym: k = 2
    :param grid: surface grid
    :param m: curve node count
    :param policy:
    :param stop: extinction rule shared by both runs
    :param angles: rays in the profile comparison
    :return: dict with t_ext_radial, t_ext_aniso, t_ext_error (relative) and
        profile_error (max radius deviation over the largest radius)
    """
    policy = policy or StepPolicy()
    stop = stop or StopRule()
    curve = ovals.radial_flow.init_profile_ellipsoid(ell, sym, m)
    radial = ovals.radial_flow.run_to_extinction(curve, policy, stop)
    if not math.isfinite(radial.t_ext):
        raise NumericalError(f"curve run of ell={ell} has no extinction time")
    surface = init_quotient_ellipsoid(EllipsoidParams(ell, 0.5), sym, grid)

    phi = np.linspace(0.0, 0.5 * math.pi, angles)
    directions = np.column_stack((np.cos(phi), np.zeros_like(phi), np.sin(phi)))
    curve_solver = ovals.radial_flow.FlowSolver(curve, policy)
    surface_solver = AnisoSolver(surface, policy)
    profile_error = 0.0
    for fraction in CROSS_SOLVER_FRACTIONS:
        t = fraction * radial.t_ext
        while curve_solver.curve.t < t * (1.0 - 1e-14):
            curve_solver.step(dt_cap=t - curve_solver.curve.t)
        while surface_solver.surface.t < t * (1.0 - 1e-14):
            surface_solver.step(dt_cap=t - surface_solver.surface.t)
        expected = ovals.radial_flow.radius_at_angles(curve_solver.curve, phi)
        measured = radius_along(surface_solver.surface, directions)
        error = float(np.max(np.abs(measured - expected)) / expected.max())
        logger.debug("[ANISO] profile deviation %.3g at t=%.6g", error, t)
        profile_error = max(profile_error, error)

    aniso = run_aniso(surface, stop, policy)
    result = {
        "t_ext_radial": radial.t_ext,
        "t_ext_aniso": aniso.t_ext,
        "t_ext_error": abs(aniso.t_ext - radial.t_ext) / radial.t_ext,
        "profile_error": profile_error,
    }
    logger.info("[ANISO] cross-solver check at ell=%g: %s", ell, result)
    return result


def _advance(s: RadialSurface, t: float, policy: StepPolicy) -> RadialSurface:
    if t <= s.t:
        return s.copy()
    solver = AnisoSolver(s, policy)
    while solver.surface.t < t * (1.0 - 1e-14):
        solver.step(dt_cap=t - solver.surface.t)
    return solver.surface


def normalize_run(record: RunRecord, target: float = None,
                  xtol: float = defs.DEFAULT_NORMALIZE_XTOL) -> NormalizedRun:
    """
    Entropy normalization: find t' with Theta(t'; t_ext) = target by
    bisection in t, re-integrating from the bracketing snapshot, and take
    the widths of the rescaled flow at time -1.

    :param record: extinction run of the surface solver
    :param target: defaults to (sigma_(n-k) + sigma_(n-k+1)) / 2
    :param xtol: bisection tolerance relative to the bracket length
    :return:
    """
    target = ovals.entropy.target_density(record.sym) if target is None else target
    t_ext = record.t_ext
    if not math.isfinite(t_ext):
        raise ValueError("run has no extinction time")
    densities = np.asarray(record.densities, dtype=float)
    valid = np.isfinite(densities)
    if not np.any(valid):
        raise TargetOutOfRangeError("run has no densities", achieved=None)
    achieved = (float(densities[valid].min()), float(densities[valid].max()))
    bracket = None
    for i in range(len(densities) - 1):
        if valid[i] and valid[i + 1] and densities[i] >= target >= densities[i + 1]:
            bracket = i
            break
    if bracket is None:
        raise TargetOutOfRangeError(
            f"density target {target:.6g} outside achieved range [{achieved[0]:.6g}, {achieved[1]:.6g}]",
            achieved=achieved,
        )

    start = record.snapshots[bracket]

    @functools.lru_cache(maxsize=None)
    def excess(t: float) -> float:
        return huisken_density(_advance(start, t, record.policy), t_ext) - target

    # grow the bracket until the re-integrated density changes sign
    t_lo = record.times[bracket]
    hi = bracket + 1
    while excess(t_lo) * excess(record.times[hi]) > 0.0:
        hi += 1
        if hi >= len(record.times) or not record.times[hi] < t_ext or not valid[hi]:
            raise TargetOutOfRangeError(
                f"re-integrated density does not cross {target:.6g} after t={t_lo:.6g}",
                achieved=achieved,
            )
        logger.warning("[ANISO] density bracket widened to t=%.6g", record.times[hi])
    t_hi = record.times[hi]

    if excess(t_lo) == 0.0:
        t_prime = t_lo
    elif excess(t_hi) == 0.0:
        t_prime = t_hi
    else:
        t_prime = bisect(excess, t_lo, t_hi, xtol=xtol * (t_hi - t_lo))
    surface = _advance(start, t_prime, record.policy)
    lam = (t_ext - t_prime) ** -0.5
    widths = (lam * axis_radius(surface, 0), lam * axis_radius(surface, 1))
    run = NormalizedRun(t_ext, t_prime, lam, widths, target, surface=surface.frozen())
    run.mu = width_ratio(run)
    logger.info("[ANISO] normalized at t'=%.8g, lambda=%.6g, widths=%s", t_prime, lam, widths)
    return run


def width_ratio(run: NormalizedRun) -> tuple:
    """
    Reciprocal width ratio mu_j = w_j^-1 / sum w^-1.

    Ex.

    widths (1, 2) -> (2/3, 1/3)

    :param run:
    :return: point of the open simplex
    """
    inverse = np.array([1.0 / w for w in run.widths])
    return tuple(float(v) for v in inverse / inverse.sum())


@dataclass
class RatioSearch:
    """Settings of the reciprocal-width-ratio map F(a1) at fixed ell."""

    sym: SymmetryClass = field(default_factory=lambda: SymmetryClass(3, 2))
    grid: int = 64
    policy: StepPolicy = field(default_factory=StepPolicy)
    stop: StopRule = field(default_factory=StopRule)
    delta: float = defs.DELTA_CLAMP
    tol_ratio: float = defs.DEFAULT_TOL_RATIO
    scan_points: int = 9
    normalize_xtol: float = defs.DEFAULT_NORMALIZE_XTOL


def measure_run(ell: float, a1: float, search: RatioSearch) -> dict:
    """
    One sweep element: flow E^(ell, a), normalize, and return the sweep row.

    :return: dict with the sweep columns and the normalized surface
    """
    params = EllipsoidParams(ell, a1, search.delta)
    record = run_aniso(init_quotient_ellipsoid(params, search.sym, search.grid), search.stop, search.policy)
    run = normalize_run(record, xtol=search.normalize_xtol)
    return {
        "ell": ell,
        "a1": params.a1,
        "t_ext": run.t_ext,
        "t_prime": run.t_prime,
        "w1": run.widths[0],
        "w2": run.widths[1],
        "mu1": run.mu[0],
        "density_monotone": record.checks["density_monotone"],
        "three_convexity": record.summary["three_convexity_min"],
        "surface": run.surface,
    }


def ratio_map(ell: float, search: RatioSearch) -> Callable[[float], float]:
    """F(a1) = mu_1 of the normalized flow, memoized."""

    @functools.lru_cache(maxsize=None)
    def F(a1: float) -> float:
        return measure_run(ell, a1, search)["mu1"]

    return F


def solve_for_ratio(target: float, ell: float = defs.DEFAULT_ELL, search: RatioSearch = None,
                    ratio_fn: Callable[[float], float] = None) -> float:
    """
    Find a1 with |F(a1) - target| <= tol_ratio.

    The relabeling symmetry F(1 - a1) = 1 - F(a1) reduces the search to
    [delta, 1/2]; bisection assumes F increasing there and a grid scan with
    local bisection takes over when that fails.

    :param target: mu_1 in (0, 1)
    :param ell:
    :param search:
    :param ratio_fn: F, measured from flows when omitted
    :return: a1
    """
    search = search or RatioSearch()
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    F = ratio_fn or ratio_map(ell, search)
    tol = search.tol_ratio
    if abs(target - 0.5) <= tol:
        return 0.5
    if target > 0.5:
        return 1.0 - solve_for_ratio(1.0 - target, ell, search, F)

    low = search.delta
    f_low = F(low)
    if target < f_low - tol:
        raise TargetOutOfRangeError(
            f"mu_1={target} below the achievable range [{f_low:.4g}, {1.0 - f_low:.4g}] at ell={ell}",
            achieved=(f_low, 1.0 - f_low),
        )
    if abs(f_low - target) <= tol:
        return low

    def excess(a1: float) -> float:
        return F(a1) - target

    a1 = bisect(excess, low, 0.5, xtol=tol * 1e-2)
    if abs(excess(a1)) <= tol:
        return float(a1)

    logger.warning("[ANISO] F not monotone near mu_1=%s, scanning", target)
    grid = np.linspace(low, 0.5, search.scan_points)
    values = [excess(a) for a in grid]
    for (a_lo, v_lo), (a_hi, v_hi) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if v_lo == 0.0:
            return float(a_lo)
        if v_lo * v_hi < 0.0:
            a1 = bisect(excess, a_lo, a_hi, xtol=tol * 1e-2)
            if abs(excess(a1)) <= tol:
                return float(a1)
    raise TargetOutOfRangeError(f"no a1 reaches mu_1={target} within {tol}", achieved=(f_low, 1.0 - f_low))


def sweep_ratio(a1_values: Sequence[float], ell: float, search: RatioSearch = None,
                threads: int = 1) -> List[Dict[str, float]]:
    """
    F over a list of a1 values on a worker pool; rows come back in input order.

    :param a1_values:
    :param ell:
    :param search:
    :param threads: worker count
    :return: sweep rows (ell, a1, t_ext, t_prime, w1, w2, mu1)
    """
    search = search or RatioSearch()
    runner = SweepRunner(threads=threads)
    for a1 in a1_values:
        runner.add_job(measure_run, ell, float(a1), search)
    return runner.run()
