"""
Experiment recipes: one function per experiment tag, each returning a
RunRecord with its summary metrics, built-in checks and output tables.
"""
import logging
import math
import time
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np

import ovals.aniso_flow
import ovals.definitions as defs
import ovals.entropy
import ovals.radial_flow
import ovals.solitons
import ovals.spectral
from ovals import models
from ovals.asymptotics import REGIONS, RegionParams, covered, verify_region
from ovals.classes import ProfileSamples, QuotientCurve, RadialSurface
from ovals.config import ExperimentConfig, config_hash, format_config
from ovals.data import (
    RunRecord,
    read_manifest,
    write_manifest,
    write_snapshot_csv,
    write_surface_csv,
    write_table,
)
from ovals.errors import TargetOutOfRangeError
from ovals.monitors import Watchdog, monitor_estimates

logger = logging.getLogger(__name__)

# share of the tau window treated as transient by the monitors
TRANSIENT_FRACTION = 1.0 / 3.0
IDENTITY_TOLERANCE = 1e-9
CLOSED_FORM_TOLERANCE = 1e-10
BOWL_CURVATURE_TOLERANCE = 1e-6
TRANSLATOR_TOLERANCE = 1e-6
MODE_LAW_TOLERANCE = 0.2
# the leaf divergence vanishes exactly at y1 = 2(k-1)/eta
FOLIATION_TOLERANCE = 1e-10
# a sweep reaching SPAN_SWEEP on both sides of 1/2 must cover SPAN in mu_1
SPAN_SWEEP = (0.2, 0.8)
SPAN = (0.35, 0.65)
REFINEMENT_DRIFT = 0.01
# |mu_1 - 1/2| must exceed this multiple of the grid-doubling drift
REFINEMENT_SIGNAL = 5.0
CROSS_SOLVER_ELL = 1.0
CROSS_SOLVER_T_EXT_TOLERANCE = 0.02
CROSS_SOLVER_PROFILE_TOLERANCE = 0.03


def _radial_run(cfg: ExperimentConfig, record_kind: str) -> Tuple[RunRecord, List[ProfileSamples]]:
    """Flow the ell-ellipsoid to extinction, normalize by density and renormalize."""
    sym = cfg.sym
    curve = ovals.radial_flow.init_profile_ellipsoid(cfg.ell, sym, cfg.m)
    record = ovals.radial_flow.run_to_extinction(curve, cfg.policy(), cfg.stop_rule())
    record.kind = record_kind
    record.summary["t_ext"] = record.t_ext
    record.summary["roundness"] = record.roundness

    times = [snap.t for snap in record.snapshots]
    valid = [d for d in record.densities if math.isfinite(d)]
    record.checks["density_monotone"] = ovals.entropy.density_monotone(valid)
    tau_shift = 0.0
    try:
        t_prime = ovals.entropy.normalization_time(times, record.densities, ovals.entropy.target_density(sym))
        tau_shift = math.log(record.t_ext - t_prime)
        record.summary["t_prime"] = t_prime
    except TargetOutOfRangeError as err:
        logger.warning("[RUN] density normalization skipped: %s", err)
    record.summary["tau_shift"] = tau_shift

    samples = ovals.radial_flow.renormalize_trajectory(record, tau_shift, cfg.n_samples)
    window = [p for p in samples if p.tau < 0.0]
    if window:
        record.summary["tau_window"] = (window[0].tau, window[-1].tau)
    record.summary["window_points"] = len(window)
    return record, window


def _region_checks(record: RunRecord, cfg: ExperimentConfig, window: List[ProfileSamples],
                   params: RegionParams) -> None:
    fiber = cfg.sym.fiber
    for region in REGIONS:
        points = covered(window, region, params)
        record.summary[f"{region}_points"] = len(points)
        if not points:
            logger.warning("[RUN] no sample covers the %s region", region)
            record.checks[f"{region}_covered"] = False
            continue
        report = verify_region(points, region, params)
        record.reports[region] = report.to_dict()
        record.tables[f"region_{region}"] = (defs.REGION_COLUMNS, report.columns())
        record.summary[f"{region}_deviation"] = report.deviation

        if region == "parabolic":
            beta_error = np.abs(np.asarray(report.coefficients["beta"]) - 1.0)
            trend = beta_error[np.unique(np.linspace(0, beta_error.size - 1, 3).round().astype(int))]
            record.summary["parabolic_beta"] = report.coefficients["beta"][-1]
            record.checks["parabolic_beta"] = bool(beta_error[-1] <= 0.15)
            record.checks["parabolic_trend"] = bool(np.all(np.diff(trend) <= 0.0))
        elif region == "intermediate":
            record.checks["intermediate_deviation"] = report.deviation <= 0.15 * math.sqrt(fiber)
            record.checks["intermediate_trend"] = report.improving()
        elif region == "tip":
            record.checks["tip_deviation"] = report.deviation <= 0.1
        else:
            ratio = report.coefficients["curvature_ratio"][-1]
            record.summary["curvature_ratio"] = ratio
            record.checks["width_deviation"] = report.deviation <= 0.2
            record.checks["width_trend"] = report.improving()
            record.checks["curvature_ratio"] = 0.35 <= ratio <= 0.65


def _monitor_checks(record: RunRecord, cfg: ExperimentConfig, window: List[ProfileSamples]) -> None:
    series = monitor_estimates(window, cfg.L, cfg.theta)
    record.monitors = series.columns()
    record.tables["monitors"] = (defs.MONITOR_COLUMNS, series.columns())
    if not series.taus:
        return
    tau_min = series.taus[int(TRANSIENT_FRACTION * (len(series.taus) - 1))]
    watchdog = Watchdog(collar_limit=defs.COLLAR_LIMIT)
    watchdog.check_monitors(series, tau_min)
    record.summary["monitor_tau_min"] = tau_min
    record.summary["monitor_trips"] = watchdog.report()
    for name in ("quadratic_concavity", "collar", "k_convexity"):
        values = series.evaluated(name)
        record.summary[f"{name}_evaluated"] = int(values.size)
        if values.size:
            record.summary[f"{name}_extreme"] = float(values.min() if name == "k_convexity" else values.max())
    record.checks["monitors"] = watchdog.passed()


def radial_asymptotics(cfg: ExperimentConfig) -> RunRecord:
    """Long-ellipsoid radial run checked against every asymptotic region and monitor."""
    record, window = _radial_run(cfg, "radial-asymptotics")
    bowl = ovals.solitons.bowl_solve(cfg.sym.d, s_max=max(cfg.S, cfg.s_max))
    _region_checks(record, cfg, window, cfg.region_params(bowl=bowl))
    _monitor_checks(record, cfg, window)
    return record


def _spectral_identities(record: RunRecord, frame: ovals.spectral.SpectralFrame, cfg: ExperimentConfig) -> float:
    kernel = ovals.spectral.apply_L(frame.psi_zero, frame)
    decay = ovals.spectral.apply_L(frame.psi_minus, frame) + frame.psi_minus
    record.summary["L_psi_zero"] = float(np.max(np.abs(kernel.coef)))
    record.summary["L_psi_minus_residual"] = float(np.max(np.abs(decay.coef)))
    record.checks["neutral_mode_kernel"] = record.summary["L_psi_zero"] <= IDENTITY_TOLERANCE
    record.checks["stable_mode_eigenvalue"] = record.summary["L_psi_minus_residual"] <= IDENTITY_TOLERANCE

    cubic = ovals.spectral.inner_H(frame.psi_zero**2, frame.psi_zero, frame)
    record.summary["cubic_moment_error"] = abs(cubic - 8.0 * frame.c_zero)
    record.checks["cubic_moment"] = record.summary["cubic_moment_error"] <= 1e-8
    if frame.k == 2:
        one = ovals.spectral.inner_H(1.0, 1.0, frame)
        quad = ovals.spectral.norm_H(frame.psi_zero / frame.c_zero, frame) ** 2
        record.checks["closed_forms"] = (
            abs(one - 2.0) <= CLOSED_FORM_TOLERANCE and abs(quad - 32.0) <= CLOSED_FORM_TOLERANCE * 32.0
        )
    c = ovals.spectral.neutral_mode_constant(frame, cfg.sym)
    record.summary["c"] = c
    return c


def spectral_trace(cfg: ExperimentConfig) -> RunRecord:
    """Spectral identities, then the neutral-mode coefficient along a radial run."""
    frame = ovals.spectral.build_frame(cfg.k, cfg.quadrature)
    record, window = _radial_run(cfg, "spectral-trace")
    _spectral_identities(record, frame, cfg)
    trace = ovals.spectral.mode_trace(window, frame, cfg.sym)
    record.tables["mode_trace"] = (defs.MODE_TRACE_COLUMNS, trace.columns())
    record.summary["mode_points"] = int(trace.taus.size)
    if trace.taus.size:
        errors = trace.relative_errors()
        record.summary["mode_relative_error"] = float(errors[-1])
        record.checks["mode_law"] = bool(errors[-1] <= MODE_LAW_TOLERANCE)
    else:
        record.checks["mode_law"] = False
    return record


def soliton_atlas(cfg: ExperimentConfig) -> RunRecord:
    """Shrinkers, tail shrinkers and the bowl, with their self-checks."""
    sym = cfg.sym
    record = RunRecord(kind="soliton-atlas", sym=sym)
    shrinkers = []
    for a in cfg.a:
        profile = ovals.solitons.shrinker_shoot(a, sym.d, tol=cfg.ode_tol)
        shrinkers.append(profile)
        record.tables[f"shrinker_a{a:g}"] = (defs.PROFILE_COLUMNS, profile.columns())
        record.summary[f"shrinker_a{a:g}_u0"] = profile.u0
        margin = ovals.solitons.shrinker_bound_margin(profile)
        record.summary[f"shrinker_a{a:g}_bound_margin"] = margin
        record.checks[f"shrinker_a{a:g}_bound"] = margin >= 0.0
    if len(shrinkers) > 1:
        record.checks["shrinkers_nested"] = ovals.solitons.leaves_nested(shrinkers)
    for b in cfg.b:
        tail = ovals.solitons.tail_shrinker_shoot(b, sym.d, r_max=cfg.r_max, tol=cfg.ode_tol)
        record.tables[f"tail_b{b:g}"] = (defs.PROFILE_COLUMNS, tail.columns())
        slope = float(tail.du[-1])
        record.summary[f"tail_b{b:g}_slope"] = slope
        record.checks[f"tail_b{b:g}_slope"] = abs(slope - b) <= 0.02 * b

    bowl = ovals.solitons.bowl_solve(sym.d, cfg.speed, max(cfg.s_max, cfg.S))
    record.tables["bowl"] = (defs.BOWL_COLUMNS, bowl.columns())
    curvature_error = abs(bowl.curvature_at_origin() - bowl.series_curvature)
    record.summary["bowl_curvature_error"] = curvature_error
    record.checks["bowl_curvature"] = curvature_error <= BOWL_CURVATURE_TOLERANCE
    residual = ovals.solitons.translator_residual(bowl)
    record.summary["translator_residual"] = residual
    record.checks["translator_identity"] = residual <= TRANSLATOR_TOLERANCE

    params = RegionParams(S=cfg.S, bowl=bowl, sym=sym)
    report = verify_region([models.bowl_zoom(bowl, -1.0, cfg.S)], "tip", params)
    record.summary["bowl_self_test"] = report.deviation
    record.checks["bowl_self_test"] = report.deviation <= 1e-8
    return record


def foliation_check(cfg: ExperimentConfig) -> RunRecord:
    """Sign reports of the shifted compact and tail leaves and the cylinder."""
    sym = cfg.sym
    record = RunRecord(kind="foliation-check", sym=sym)
    leaves = [(ovals.solitons.LEAF_COMPACT, a) for a in cfg.a]
    leaves += [(ovals.solitons.LEAF_TAIL, b) for b in cfg.b]
    leaves.append((ovals.solitons.LEAF_CYLINDER, float("nan")))
    for kind, param in leaves:
        shoot = {"tol": cfg.ode_tol}
        if kind == ovals.solitons.LEAF_TAIL:
            shoot["r_max"] = cfg.r_max
        if kind == ovals.solitons.LEAF_CYLINDER:
            leaf = ovals.solitons.make_leaf(kind, cfg.eta, sym)
        else:
            leaf = ovals.solitons.make_leaf(kind, cfg.eta, sym, param, **shoot)
        y1 = ovals.solitons.leaf_samples(leaf, cfg.leaf_samples)
        report = ovals.solitons.sign_report(leaf, y1)
        name = kind if kind == ovals.solitons.LEAF_CYLINDER else f"{kind}_{param:g}"
        record.tables[f"signs_{name}"] = (defs.SIGN_REPORT_COLUMNS, report)
        values = np.asarray(report["value"])
        if kind == ovals.solitons.LEAF_COMPACT:
            record.checks[f"signs_{name}"] = bool(np.all(values <= FOLIATION_TOLERANCE))
            record.summary[f"signs_{name}_max"] = float(values.max())
        elif kind == ovals.solitons.LEAF_TAIL:
            record.checks[f"signs_{name}"] = bool(np.all(values >= -FOLIATION_TOLERANCE))
            record.summary[f"signs_{name}_min"] = float(values.min())
        else:
            record.checks[f"signs_{name}"] = bool(np.all(np.abs(values) <= 1e-12))
    return record


def _search(cfg: ExperimentConfig) -> ovals.aniso_flow.RatioSearch:
    return ovals.aniso_flow.RatioSearch(
        sym=cfg.sym,
        grid=cfg.grid,
        policy=cfg.policy(),
        stop=cfg.stop_rule(),
        delta=cfg.delta,
        tol_ratio=cfg.tol_ratio,
        normalize_xtol=cfg.normalize_xtol,
    )


def _refinement_check(record: RunRecord, cfg: ExperimentConfig, search: ovals.aniso_flow.RatioSearch,
                      mu: Dict[float, float]) -> None:
    """Rerun one sweep point at twice the grid (a quarter of the step) and compare mu_1."""
    a1 = cfg.refine_a1
    coarse = mu.get(round(a1, 12))
    if coarse is None:
        coarse = ovals.aniso_flow.measure_run(cfg.ell, a1, search)["mu1"]
    fine = ovals.aniso_flow.measure_run(cfg.ell, a1, replace(search, grid=2 * search.grid))["mu1"]
    drift = abs(fine - coarse)
    logger.info("[RUN] mu_1(%g) = %.6g on grid %d, %.6g on grid %d", a1, coarse, search.grid, fine, 2 * search.grid)
    record.summary["refinement_a1"] = a1
    record.summary["refinement_drift"] = drift
    record.checks["refinement_drift"] = drift <= REFINEMENT_DRIFT
    if round(a1, 12) != 0.5:
        record.checks["reduced_symmetry"] = abs(coarse - 0.5) > REFINEMENT_SIGNAL * drift


def width_ratio(cfg: ExperimentConfig) -> RunRecord:
    """F(a1) over the configured a1 values."""
    record = RunRecord(kind="width-ratio", sym=cfg.sym)
    search = _search(cfg)
    rows = ovals.aniso_flow.sweep_ratio(cfg.a1, cfg.ell, search, cfg.threads)
    record.tables["sweep"] = (
        defs.SWEEP_COLUMNS,
        {column: [row[column] for row in rows] for column in defs.SWEEP_COLUMNS},
    )
    record.snapshots = [row["surface"] for row in rows if row.get("surface") is not None]
    mu = {round(row["a1"], 12): row["mu1"] for row in rows}
    record.summary["mu1"] = [row["mu1"] for row in rows]
    record.summary["t_ext"] = [row["t_ext"] for row in rows]
    record.summary["three_convexity_min"] = min(row["three_convexity"] for row in rows)
    record.checks["density_monotone"] = all(row["density_monotone"] for row in rows)
    record.checks["three_convexity"] = record.summary["three_convexity_min"] > 0.0
    if 0.5 in mu:
        record.checks["symmetric_point"] = abs(mu[0.5] - 0.5) <= cfg.tol_ratio
    ordered = [mu[a] for a in sorted(mu)]
    if len(ordered) >= 3:
        record.checks["monotone"] = bool(np.all(np.diff(ordered) > 0.0))
    if min(mu) <= SPAN_SWEEP[0] and max(mu) >= SPAN_SWEEP[1]:
        record.checks["span"] = min(ordered) <= SPAN[0] and max(ordered) >= SPAN[1]
    for a in mu:
        if a < 0.5 and round(1.0 - a, 12) in mu:
            record.checks[f"relabel_{a:g}"] = abs(mu[a] + mu[round(1.0 - a, 12)] - 1.0) <= cfg.tol_ratio
    if cfg.refine:
        _refinement_check(record, cfg, search, mu)
    return record


def ratio_solve(cfg: ExperimentConfig) -> RunRecord:
    """a1 with F(a1) = target for every configured target."""
    record = RunRecord(kind="ratio-solve", sym=cfg.sym)
    search = _search(cfg)
    F = ovals.aniso_flow.ratio_map(cfg.ell, search)
    solved = {"target": [], "a1": [], "mu1": []}
    for target in cfg.targets:
        a1 = ovals.aniso_flow.solve_for_ratio(target, cfg.ell, search, F)
        mu1 = F(a1)
        solved["target"].append(target)
        solved["a1"].append(a1)
        solved["mu1"].append(mu1)
        record.checks[f"target_{target:g}"] = abs(mu1 - target) <= cfg.tol_ratio
    record.tables["ratio_solve"] = (defs.RATIO_SOLVE_COLUMNS, solved)
    record.summary["a1"] = solved["a1"]
    record.summary["mu1"] = solved["mu1"]
    return record


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], RunRecord]] = {
    "radial-asymptotics": radial_asymptotics,
    "spectral-trace": spectral_trace,
    "soliton-atlas": soliton_atlas,
    "foliation-check": foliation_check,
    "width-ratio": width_ratio,
    "ratio-solve": ratio_solve,
}


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """
    Run the experiment named by the config tag. The pipeline holds no
    randomness, so equal configs give equal records up to wall-clock.

    :param cfg: validated config
    :return: RunRecord with summary, checks and tables
    """
    start = time.perf_counter()
    logger.info("[RUN] starting %s", cfg.tag)
    record = EXPERIMENTS[cfg.tag](cfg)
    record.config_hash = config_hash(cfg)
    record.summary["tag"] = cfg.tag
    record.wall_clock_s = time.perf_counter() - start
    logger.info(
        "[RUN] %s finished in %.2f s, checks %s",
        cfg.tag, record.wall_clock_s, "passed" if record.passed() else "FAILED",
    )
    return record


def verify_experiment(cfg: ExperimentConfig) -> RunRecord:
    """
    Oracle checks only: the closed-form solutions each kernel the
    experiment uses must reproduce, without the experiment itself.
    """
    sym = cfg.sym
    record = RunRecord(kind=f"verify-{cfg.tag}", sym=sym)
    if cfg.tag in ("radial-asymptotics", "spectral-trace"):
        radius = 1.0
        curve = ovals.radial_flow.init_quarter_circle(radius, sym, cfg.m)
        sphere = ovals.radial_flow.run_to_extinction(curve, cfg.policy())
        expected = models.SphereModel.extinction_time(radius, sym.n)
        record.summary["sphere_t_ext"] = sphere.t_ext
        record.checks["sphere_extinction"] = abs(sphere.t_ext - expected) <= 5e-3 * expected
    if cfg.tag in ("radial-asymptotics",):
        tau = -100.0
        params = cfg.region_params(bowl=ovals.solitons.bowl_solve(sym.d, s_max=max(cfg.S, cfg.s_max)))
        parabolic = verify_region([models.parabolic_samples(tau, sym, rho_max=2.0 * cfg.M)], "parabolic", params)
        ellipse = verify_region([models.ellipse_samples(tau, sym)], "intermediate", params)
        tip = verify_region([models.bowl_zoom(params.bowl, tau, cfg.S)], "tip", params)
        width = verify_region([models.tip_law_samples(tau, sym)], "width", params)
        record.checks["parabolic_self_test"] = parabolic.deviation <= 1e-4
        record.checks["intermediate_self_test"] = ellipse.deviation <= 1e-4
        record.checks["tip_self_test"] = tip.deviation <= 1e-10
        record.checks["width_self_test"] = width.deviation <= 1e-10
    if cfg.tag == "spectral-trace":
        _spectral_identities(record, ovals.spectral.build_frame(cfg.k, cfg.quadrature), cfg)
    if cfg.tag in ("soliton-atlas", "foliation-check"):
        bowl = ovals.solitons.bowl_solve(sym.d, cfg.speed, max(cfg.s_max, cfg.S))
        record.checks["bowl_curvature"] = (
            abs(bowl.curvature_at_origin() - bowl.series_curvature) <= BOWL_CURVATURE_TOLERANCE
        )
        cylinder = ovals.solitons.make_leaf(ovals.solitons.LEAF_CYLINDER, cfg.eta, sym)
        values = ovals.solitons.foliation_divergence(cylinder, ovals.solitons.leaf_samples(cylinder, 11))
        record.checks["cylinder_leaf"] = bool(np.all(np.abs(values) <= 1e-12))
    if cfg.tag in ("width-ratio", "ratio-solve"):
        radius = math.sqrt(2.0 * sym.n)
        surface = ovals.aniso_flow.init_round_surface(radius, sym, cfg.grid)
        sphere = ovals.aniso_flow.run_aniso(surface, policy=cfg.policy())
        record.summary["sphere_t_ext"] = sphere.t_ext
        record.checks["sphere_extinction"] = abs(sphere.t_ext - 1.0) <= 5e-3
        record.checks["sphere_density_monotone"] = sphere.checks.get("density_monotone", False)
        agreement = ovals.aniso_flow.cross_solver_agreement(
            CROSS_SOLVER_ELL, sym, cfg.grid, cfg.m, cfg.policy(), cfg.stop_rule()
        )
        record.summary.update({f"cross_solver_{key}": value for key, value in agreement.items()})
        record.checks["cross_solver_t_ext"] = agreement["t_ext_error"] <= CROSS_SOLVER_T_EXT_TOLERANCE
        record.checks["cross_solver_profile"] = agreement["profile_error"] <= CROSS_SOLVER_PROFILE_TOLERANCE
    record.config_hash = config_hash(cfg)
    record.summary["tag"] = cfg.tag
    return record


def _summary_table(record: RunRecord) -> str:
    width = max([len(k) for k in list(record.summary) + list(record.checks)] + [6])
    lines = [f"{'metric':<{width}}  value"]
    for key, value in sorted(record.summary.items()):
        if isinstance(value, float):
            value = f"{value:.10g}"
        lines.append(f"{key:<{width}}  {value}")
    lines.append("")
    lines.append(f"{'check':<{width}}  result")
    for key, value in sorted(record.checks.items()):
        lines.append(f"{key:<{width}}  {'PASS' if value else 'FAIL'}")
    return "\n".join(lines) + "\n"


def emit_outputs(record: RunRecord, out: Path, cfg: ExperimentConfig = None) -> List[Path]:
    """
    Write the CSV tables, curve and surface snapshots, the manifest, a summary table and
    the timing file under `out`. Only timing.json depends on the clock.

    :param record: finished record
    :param out: output directory
    :param cfg: written beside the outputs when given
    :return: paths written
    """
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"could not create {out}: {err}") from err
    paths: List[Path] = []
    for stem, (columns, data) in sorted(record.tables.items()):
        paths.append(write_table(out / f"{stem}.csv", columns, data))
    for i, snap in enumerate(record.snapshots):
        path = out / "snapshots" / f"snapshot_{i:04d}.csv"
        if isinstance(snap, QuotientCurve):
            paths.append(write_snapshot_csv(snap, path))
        elif isinstance(snap, RadialSurface):
            theta, phi = ovals.aniso_flow.node_angles(snap)
            radius = np.linalg.norm(ovals.aniso_flow.node_positions(snap), axis=-1)
            paths.append(write_surface_csv(snap, theta, phi, radius, path))
    if cfg is not None:
        config_path = out / "config.txt"
        try:
            config_path.write_text(format_config(cfg))
        except OSError as err:
            raise OSError(f"could not write {config_path}: {err}") from err
        paths.append(config_path)

    summary_path = out / defs.SUMMARY_NAME
    try:
        summary_path.write_text(_summary_table(record))
    except OSError as err:
        raise OSError(f"could not write {summary_path}: {err}") from err
    paths.append(summary_path)

    record.artifacts = [str(p.relative_to(out)) for p in paths]
    paths.append(write_manifest(out / defs.MANIFEST_NAME, record.manifest()))
    paths.append(
        write_manifest(
            out / defs.TIMING_NAME,
            {"config_hash": record.config_hash, "wall_clock_s": record.wall_clock_s},
        )
    )
    logger.info("[RUN] wrote %d files to %s", len(paths), out)
    return paths


def write_diagnostic(out: Path, err: Exception, cfg_hash: str) -> Path:
    """diagnostic.json for a numerical failure."""
    return write_manifest(
        Path(out) / defs.DIAGNOSTIC_NAME,
        {"type": type(err).__name__, "message": str(err), "config_hash": cfg_hash},
    )


def load_manifest(out: Path) -> dict:
    return read_manifest(Path(out) / defs.MANIFEST_NAME)
