"""Data Module"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

import ovals.definitions as defs
import ovals.helpers
from ovals.classes import QuotientCurve, RadialSurface, StepPolicy, SymmetryClass

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass
class RunRecord:
    """
    Timestamped trajectory with extinction time, densities, widths and
    monitor series; the unit of persistence.

    Snapshots are immutable copies (QuotientCurve or RadialSurface).
    """

    kind: str
    sym: SymmetryClass
    snapshots: List[Any] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    sizes: List[float] = field(default_factory=list)
    t_ext: float = float("nan")
    status: int = defs.STATUS_OK
    roundness: float = float("nan")
    step_count: int = 0
    rejection_count: int = 0
    convexity_lost: bool = False
    convexity_lost_at: Optional[float] = None
    densities: List[float] = field(default_factory=list)
    widths: List[tuple] = field(default_factory=list)
    monitors: Dict[str, list] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    tables: Dict[str, tuple] = field(default_factory=dict)  # file stem -> (columns, data)
    reports: Dict[str, dict] = field(default_factory=dict)
    policy: StepPolicy = field(default_factory=StepPolicy)
    config_hash: str = ""
    wall_clock_s: float = float("nan")
    tool_version: str = defs.TOOL_VERSION

    def passed(self) -> bool:
        """True when every built-in check passed."""
        return all(self.checks.values())

    def manifest(self) -> dict:
        """Deterministic manifest content (no wall-clock)."""
        return {
            "kind": self.kind,
            "n": self.sym.n,
            "k": self.sym.k,
            "t_ext": _finite_or_none(self.t_ext),
            "roundness": _finite_or_none(self.roundness),
            "status": self.status,
            "step_count": self.step_count,
            "rejection_count": self.rejection_count,
            "snapshot_count": len(self.snapshots),
            "convexity_lost": self.convexity_lost,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "summary": {k: _jsonable(v) for k, v in sorted(self.summary.items())},
            "checks": dict(sorted(self.checks.items())),
            "artifacts": sorted(self.artifacts),
            "reports": {k: _jsonable(v) for k, v in sorted(self.reports.items())},
        }


class TrajectoryRecorder:
    """
    Decides when a running solver is snapshotted and keeps a trailing cache
    of (time, size) pairs from which the extinction time is extrapolated.

    A snapshot is taken each time the size measure has dropped by
    `snapshot_fraction` since the last one.
    """

    _cache: List[tuple] = None
    _length: int = defs.DEFAULT_FIT_POINTS
    _last_size: float = None

    def __init__(self, record: RunRecord, snapshot_fraction: float, fit_points: int):
        self.record = record
        self.snapshot_fraction = snapshot_fraction
        self._length = max(2, fit_points)
        self._cache = []
        self._last_size = None

    def cache(self, t: float, size: float) -> None:
        """Keep the trailing `_length` (time, size) pairs."""
        self._cache.append((t, size))
        if len(self._cache) > self._length:
            self._cache.pop(0)

    def record_at_interval(self, state: Union[QuotientCurve, RadialSurface], size: float,
                           force: bool = False) -> bool:
        """
        Snapshot `state` if the size dropped enough since the last snapshot.

        :param state: solver state, copied before storing
        :param size: current size measure
        :param force: snapshot regardless of the schedule
        :return: True if a snapshot was taken
        """
        if (
            force
            or self._last_size is None
            or size <= self._last_size * (1.0 - self.snapshot_fraction)
        ):
            self.record.snapshots.append(state.frozen())
            self.record.times.append(float(state.t))
            self.record.sizes.append(float(size))
            self._last_size = size
            self.cache(float(state.t), float(size))
            return True
        return False

    def calc_extinction_time(self) -> float:
        """
        Extrapolate the time at which the size measure vanishes from the
        trailing cache; near a round point the size decays linearly.

        :return: extinction time, or nan if the cache is too short
        """
        if len(self._cache) < 2:
            return float("nan")
        times, sizes = zip(*self._cache)
        try:
            t_ext, _ = ovals.helpers.linear_extrapolate_root(np.array(times), np.array(sizes))
        except (ValueError, np.linalg.LinAlgError) as err:
            logger.warning("[DATA] extinction fit failed: %s", err)
            return float("nan")
        return float(t_ext)


def _finite_or_none(value):
    try:
        return float(value) if math.isfinite(float(value)) else None
    except (TypeError, ValueError):
        return None


def _jsonable(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return _finite_or_none(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in sorted(value.items())}
    return value


def _write_with_header(path: Path, header: Dict[str, Any], frame: pd.DataFrame) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            for key, value in header.items():
                fh.write(f"# {key}={value}\n")
            frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as err:
        raise OSError(f"could not write {path}: {err}") from err
    return path


def _read_with_header(path: Path) -> tuple:
    path = Path(path)
    header = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
    return header, pd.read_csv(path, comment="#")


def write_table(path: Path, columns: Sequence[str], data: Dict[str, Iterable],
                header: Dict[str, Any] = None) -> Path:
    """
    Write a CSV whose columns are exactly `columns`.

    :param path:
    :param columns: schema from `definitions`
    :param data: column name -> values
    :param header: optional comment header block
    :return: path written
    """
    missing = [c for c in columns if c not in data]
    if missing:
        raise KeyError(f"missing columns {missing} for {path}")
    frame = pd.DataFrame({c: list(data[c]) for c in columns}, columns=list(columns))
    return _write_with_header(Path(path), header or {}, frame)


def write_snapshot_csv(curve: QuotientCurve, path: Path) -> Path:
    """Snapshot CSV: header block (n, k, t, frame) then columns (i, r, y)."""
    header = {"n": curve.sym.n, "k": curve.sym.k, "t": repr(float(curve.t)), "frame": curve.frame}
    if curve.tau is not None:
        header["tau"] = repr(float(curve.tau))
    frame = pd.DataFrame(
        {"i": np.arange(curve.m), "r": curve.r, "y": curve.y}, columns=list(defs.SNAPSHOT_COLUMNS)
    )
    return _write_with_header(path, header, frame)


def read_snapshot_csv(path: Path) -> QuotientCurve:
    """Inverse of `write_snapshot_csv`."""
    header, frame = _read_with_header(path)
    sym = SymmetryClass(int(header["n"]), int(header["k"]))
    tau = float(header["tau"]) if "tau" in header else None
    nodes = frame[["r", "y"]].to_numpy(dtype=float)
    return QuotientCurve(nodes, float(header["t"]), sym, header["frame"], tau)


def write_surface_csv(surface: RadialSurface, theta: np.ndarray, phi: np.ndarray,
                      radius: np.ndarray, path: Path) -> Path:
    """
    Surface snapshot CSV: header block then columns (theta, phi, r) per node,
    r being the distance |X| of the node from the origin.
    """
    header = {"n": surface.sym.n, "k": surface.sym.k, "t": repr(float(surface.t)),
              "patch_size": surface.patch_size}
    return write_table(
        path,
        defs.SURFACE_COLUMNS,
        {"theta": np.ravel(theta), "phi": np.ravel(phi), "r": np.ravel(radius)},
        header,
    )


def write_manifest(path: Path, content: dict) -> Path:
    """One JSON manifest, sorted keys, stable float repr."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_jsonable(content), indent=2, sort_keys=True) + "\n")
    except OSError as err:
        raise OSError(f"could not write {path}: {err}") from err
    return path


def read_manifest(path: Path) -> dict:
    return json.loads(Path(path).read_text())


def write_trajectory(record: RunRecord, directory: Path) -> List[Path]:
    """
    Directory of snapshot CSVs plus the manifest.

    :param record:
    :param directory:
    :return: paths written, snapshots first
    """
    directory = Path(directory)
    paths = []
    for i, snap in enumerate(record.snapshots):
        if isinstance(snap, QuotientCurve):
            paths.append(write_snapshot_csv(snap, directory / f"snapshot_{i:04d}.csv"))
    manifest = record.manifest()
    manifest["snapshots"] = [p.name for p in paths]
    paths.append(write_manifest(directory / defs.MANIFEST_NAME, manifest))
    logger.info("[DATA] wrote %d snapshots to %s", len(paths) - 1, directory)
    return paths
