import json

import pytest

import ovals.definitions as defs
from ovals import experiments
from ovals.classes import SymmetryClass
from ovals.cli import main
from ovals.config import build_config, config_hash
from ovals.data import RunRecord

FOLIATION = """
tag = foliation-check
a = 10
b = 0.5
"""


def _run(tmp_path, text, *extra, name="out"):
    config = tmp_path / f"{name}.cfg"
    config.write_text(text)
    out = tmp_path / name
    return main(["foliation-check", "--config", str(config), "--out", str(out), *extra]), out


def test_foliation_check_passes(tmp_path):
    code, out = _run(tmp_path, FOLIATION)
    assert code == defs.EXIT_OK
    manifest = experiments.load_manifest(out)
    assert manifest["kind"] == "foliation-check"
    assert set(manifest["checks"]) == {"signs_compact_10", "signs_tail_0.5", "signs_cylinder"}
    assert all(manifest["checks"].values())
    for name in ("signs_compact_10.csv", "signs_tail_0.5.csv", "signs_cylinder.csv", "config.txt", "summary.txt"):
        assert (out / name).exists()
        assert name in manifest["artifacts"]
    assert "PASS" in (out / "summary.txt").read_text()
    timing = json.loads((out / defs.TIMING_NAME).read_text())
    assert timing["config_hash"] == manifest["config_hash"]


def test_outputs_are_deterministic(tmp_path):
    _, first = _run(tmp_path, FOLIATION, name="first")
    _, second = _run(tmp_path, FOLIATION, "--threads", "2", name="second")
    assert experiments.load_manifest(first) == experiments.load_manifest(second)
    for name in ("signs_compact_10.csv", "signs_tail_0.5.csv", "summary.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_invalid_config_exits_2(tmp_path):
    code, out = _run(tmp_path, "tag = foliation-check\n")
    assert code == defs.EXIT_INVALID_CONFIG
    assert not out.exists()
    code, _ = _run(tmp_path, "tag = soliton-atlas\n", name="mismatch")
    assert code == defs.EXIT_INVALID_CONFIG


def test_unknown_tag_is_rejected_by_the_parser():
    with pytest.raises(SystemExit) as err:
        main(["neck-pinch"])
    assert err.value.code == 2


def test_numerical_failure_writes_diagnostic(tmp_path):
    # shrinkers need a tip at a >= 2
    code, out = _run(tmp_path, "tag = foliation-check\na = 1\n")
    assert code == defs.EXIT_NUMERICAL_FAILURE
    diagnostic = json.loads((out / defs.DIAGNOSTIC_NAME).read_text())
    assert diagnostic["type"] == "ValueError"
    cfg = build_config({"tag": "foliation-check", "a": [1.0], "out": str(out)})
    assert diagnostic["config_hash"] == config_hash(cfg)


def test_failed_checks_exit_1(tmp_path, monkeypatch):
    def failing(cfg):
        record = RunRecord(kind="foliation-check", sym=SymmetryClass(cfg.n, cfg.k))
        record.checks["signs_cylinder"] = False
        return record

    monkeypatch.setitem(experiments.EXPERIMENTS, "foliation-check", failing)
    code, out = _run(tmp_path, FOLIATION)
    assert code == defs.EXIT_CHECKS_FAILED
    assert "FAIL" in (out / "summary.txt").read_text()


def test_verify_runs_oracles_only(tmp_path):
    code, out = _run(tmp_path, FOLIATION, "--verify")
    assert code == defs.EXIT_OK
    manifest = experiments.load_manifest(out)
    assert manifest["kind"] == "verify-foliation-check"
    assert manifest["checks"] == {"bowl_curvature": True, "cylinder_leaf": True}
