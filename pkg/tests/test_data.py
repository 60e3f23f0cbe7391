import numpy as np
import pandas as pd
import pytest

import ovals.definitions as defs
from ovals.classes import QuotientCurve
from ovals.data import (
    RunRecord,
    TrajectoryRecorder,
    read_manifest,
    read_snapshot_csv,
    write_manifest,
    write_snapshot_csv,
    write_table,
    write_trajectory,
)
from ovals.radial_flow import init_quarter_circle, renormalize_curve


def test_write_table_keeps_column_order(tmp_path):
    path = write_table(
        tmp_path / "bowl.csv",
        defs.BOWL_COLUMNS,
        {"derivative": [0.0, -0.1], "value": [0.0, -0.005], "s": [0.0, 0.1]},
    )
    frame = pd.read_csv(path)
    assert tuple(frame.columns) == defs.BOWL_COLUMNS
    assert frame["s"].tolist() == [0.0, 0.1]


def test_write_table_requires_every_column(tmp_path):
    with pytest.raises(KeyError):
        write_table(tmp_path / "bowl.csv", defs.BOWL_COLUMNS, {"s": [0.0], "value": [0.0]})


def test_snapshot_csv_keeps_header_and_nodes(tmp_path, sym32):
    curve = renormalize_curve(init_quarter_circle(1.0, sym32, 32), t_ext=0.25)
    back = read_snapshot_csv(write_snapshot_csv(curve, tmp_path / "snapshot_0000.csv"))
    assert back.frame == defs.FRAME_RENORMALIZED
    assert back.tau == curve.tau
    assert back.sym == sym32
    np.testing.assert_allclose(back.nodes, curve.nodes, rtol=1e-14, atol=1e-15)


def test_manifest_drops_non_finite_values(tmp_path, sym32):
    record = RunRecord(kind="soliton-atlas", sym=sym32)
    record.summary["u0"] = np.float64(2.02)
    record.summary["missing"] = float("nan")
    record.checks["bowl_curvature"] = np.bool_(True)
    manifest = read_manifest(write_manifest(tmp_path / defs.MANIFEST_NAME, record.manifest()))
    assert manifest["t_ext"] is None
    assert manifest["summary"]["u0"] == 2.02
    assert manifest["summary"]["missing"] is None
    assert manifest["checks"] == {"bowl_curvature": True}
    assert manifest["tool_version"] == defs.TOOL_VERSION


def test_run_record_passed(sym32):
    record = RunRecord(kind="foliation-check", sym=sym32)
    assert record.passed()
    record.checks.update({"a": True, "b": False})
    assert not record.passed()


def _circle_at(sym, t):
    curve = init_quarter_circle(1.0, sym, 32)
    return QuotientCurve(curve.nodes, t, sym)


def test_recorder_snapshot_schedule(sym32):
    record = RunRecord(kind="radial", sym=sym32)
    recorder = TrajectoryRecorder(record, snapshot_fraction=0.02, fit_points=8)
    assert recorder.record_at_interval(_circle_at(sym32, 0.0), 1.0)
    assert not recorder.record_at_interval(_circle_at(sym32, 0.1), 0.99)
    assert recorder.record_at_interval(_circle_at(sym32, 0.2), 0.97)
    assert recorder.record_at_interval(_circle_at(sym32, 0.3), 0.969, force=True)
    assert record.times == [0.0, 0.2, 0.3]
    assert not record.snapshots[0].nodes.flags.writeable


def test_recorder_extrapolates_linear_decay(sym32):
    record = RunRecord(kind="radial", sym=sym32)
    recorder = TrajectoryRecorder(record, snapshot_fraction=0.02, fit_points=4)
    assert np.isnan(recorder.calc_extinction_time())
    for t in (0.0, 0.5, 1.0, 1.5):
        recorder.record_at_interval(_circle_at(sym32, t), 1.0 - 0.5 * t, force=True)
    assert recorder.calc_extinction_time() == pytest.approx(2.0)


def test_write_trajectory(tmp_path, sym32):
    record = RunRecord(kind="radial", sym=sym32)
    record.snapshots = [_circle_at(sym32, 0.0).frozen(), _circle_at(sym32, 0.1).frozen()]
    paths = write_trajectory(record, tmp_path)
    assert [p.name for p in paths] == ["snapshot_0000.csv", "snapshot_0001.csv", defs.MANIFEST_NAME]
    manifest = read_manifest(tmp_path / defs.MANIFEST_NAME)
    assert manifest["snapshots"] == ["snapshot_0000.csv", "snapshot_0001.csv"]
    assert manifest["snapshot_count"] == 2
