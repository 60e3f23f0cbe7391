import numpy as np
import pandas as pd
import pytest

import ovals.aniso_flow
from ovals import experiments
from ovals.config import build_config


def _fake_measure(ell, a1, search):
    """Stand-in for a surface flow whose width ratio equals a1."""
    return {"ell": ell, "a1": a1, "t_ext": 1.0, "t_prime": 0.5, "w1": 1.0 - a1, "w2": a1, "mu1": a1,
            "density_monotone": True, "three_convexity": 1.0}



@pytest.fixture
def fake_flows(monkeypatch):
    monkeypatch.setattr(ovals.aniso_flow, "measure_run", _fake_measure)


def test_soliton_atlas():
    cfg = build_config({"tag": "soliton-atlas", "n": 4, "k": 2, "a": [14.0, 10.0]})
    record = experiments.run_experiment(cfg)
    assert record.passed(), record.checks
    assert {"shrinker_a14_bound", "shrinker_a10_bound", "shrinkers_nested", "bowl_curvature",
            "translator_identity", "bowl_self_test"} <= set(record.checks)
    assert set(record.tables) == {"shrinker_a14", "shrinker_a10", "bowl"}
    assert record.summary["tag"] == "soliton-atlas"


def test_width_ratio_bookkeeping(fake_flows):
    cfg = build_config({"tag": "width-ratio", "a1": [0.5, 0.3, 0.7]})
    record = experiments.run_experiment(cfg)
    assert record.checks == {
        "symmetric_point": True, "monotone": True, "relabel_0.3": True, "density_monotone": True,
        "three_convexity": True, "refinement_drift": True, "reduced_symmetry": True,
    }
    assert record.summary["refinement_drift"] == 0.0
    columns, data = record.tables["sweep"]
    assert data["a1"] == [0.5, 0.3, 0.7]
    assert list(columns) == ["ell", "a1", "t_ext", "t_prime", "w1", "w2", "mu1"]


def test_ratio_solve_bookkeeping(fake_flows):
    cfg = build_config({"tag": "ratio-solve", "targets": [0.25, 0.8], "tol_ratio": 1e-3})
    record = experiments.run_experiment(cfg)
    assert record.passed()
    assert record.summary["a1"] == pytest.approx([0.25, 0.8], abs=1e-3)


def test_verify_soliton_oracles():
    record = experiments.verify_experiment(build_config({"tag": "soliton-atlas"}))
    assert record.checks == {"bowl_curvature": True, "cylinder_leaf": True}
    assert record.kind == "verify-soliton-atlas"


@pytest.mark.slow
def test_verify_spectral_trace():
    record = experiments.verify_experiment(build_config({"tag": "spectral-trace"}))
    assert record.passed(), record.checks
    assert {"sphere_extinction", "neutral_mode_kernel", "stable_mode_eigenvalue", "cubic_moment",
            "closed_forms"} <= set(record.checks)


def test_surface_snapshots_are_written(tmp_path, monkeypatch, sym32):
    surface = ovals.aniso_flow.init_round_surface(2.0, sym32, grid=32)

    def measure_with_surface(ell, a1, search):
        return {**_fake_measure(ell, a1, search), "surface": surface.frozen()}

    monkeypatch.setattr(ovals.aniso_flow, "measure_run", measure_with_surface)
    cfg = build_config({"tag": "width-ratio", "a1": [0.5]})
    record = experiments.run_experiment(cfg)
    assert len(record.snapshots) == 1
    experiments.emit_outputs(record, tmp_path, cfg)
    frame = pd.read_csv(tmp_path / "snapshots" / "snapshot_0000.csv", comment="#")
    assert list(frame.columns) == ["theta", "phi", "r"]
    assert len(frame) == 3 * 16 * 16
    np.testing.assert_allclose(frame["r"], 2.0, rtol=1e-9)
    assert experiments.load_manifest(tmp_path)["snapshot_count"] == 1


def test_width_ratio_span(fake_flows):
    cfg = build_config({"tag": "width-ratio", "a1": [0.2, 0.35, 0.5, 0.65, 0.8], "refine": False})
    record = experiments.run_experiment(cfg)
    assert record.checks["span"]
    assert "refinement_drift" not in record.checks


def test_width_ratio_flags_a_narrow_span(monkeypatch):
    def flat_measure(ell, a1, search):
        return {**_fake_measure(ell, a1, search), "mu1": 0.5 + 0.1 * (a1 - 0.5)}

    monkeypatch.setattr(ovals.aniso_flow, "measure_run", flat_measure)
    cfg = build_config({"tag": "width-ratio", "a1": [0.2, 0.5, 0.8], "refine": False})
    record = experiments.run_experiment(cfg)
    assert record.checks["monotone"]
    assert not record.checks["span"]
    assert not record.passed()


def test_refinement_reruns_on_twice_the_grid(monkeypatch):
    grids = []

    def drifting_measure(ell, a1, search):
        grids.append((a1, search.grid))
        mu1 = a1 if search.grid == 64 else a1 + 0.02
        return {**_fake_measure(ell, a1, search), "mu1": mu1}

    monkeypatch.setattr(ovals.aniso_flow, "measure_run", drifting_measure)
    cfg = build_config({"tag": "width-ratio", "a1": [0.5], "refine_a1": 0.45})
    record = experiments.run_experiment(cfg)
    assert sorted(grids) == [(0.45, 64), (0.45, 128), (0.5, 64)]
    assert record.summary["refinement_drift"] == pytest.approx(0.02)
    assert not record.checks["refinement_drift"]
    assert not record.checks["reduced_symmetry"]
    assert len(record.snapshots) == 0


def test_width_ratio_reports_failed_flow_checks(monkeypatch):
    def rough_measure(ell, a1, search):
        return {**_fake_measure(ell, a1, search), "density_monotone": a1 != 0.3, "three_convexity": a1 - 0.4}

    monkeypatch.setattr(ovals.aniso_flow, "measure_run", rough_measure)
    cfg = build_config({"tag": "width-ratio", "a1": [0.3, 0.5], "refine": False})
    record = experiments.run_experiment(cfg)
    assert not record.checks["density_monotone"]
    assert not record.checks["three_convexity"]
    assert record.summary["three_convexity_min"] == pytest.approx(-0.1)


def test_search_carries_the_config():
    cfg = build_config({"tag": "width-ratio", "a1": [0.5], "normalize_xtol": 2e-4, "grid": 48})
    search = experiments._search(cfg)
    assert search.normalize_xtol == 2e-4
    assert search.grid == 48
    assert search.sym == cfg.sym


@pytest.mark.slow
def test_width_ratio_small_grid_run():
    cfg = build_config({"tag": "width-ratio", "a1": [0.5], "ell": 4.0, "grid": 32, "refine": False})
    record = experiments.run_experiment(cfg)
    assert record.checks["symmetric_point"], record.summary
    assert record.checks["three_convexity"]
    assert len(record.snapshots) == 1
    columns, data = record.tables["sweep"]
    assert 0.0 < data["t_prime"][0] < data["t_ext"][0]


@pytest.mark.slow
def test_ratio_solve_small_grid_run():
    cfg = build_config({"tag": "ratio-solve", "targets": [0.5], "ell": 4.0, "grid": 32})
    record = experiments.run_experiment(cfg)
    assert record.passed(), record.checks
    assert record.summary["a1"] == [0.5]


@pytest.mark.slow
def test_verify_width_ratio_compares_solvers():
    record = experiments.verify_experiment(build_config({"tag": "width-ratio", "a1": [0.5]}))
    assert {"sphere_extinction", "sphere_density_monotone", "cross_solver_t_ext",
            "cross_solver_profile"} <= set(record.checks)
    assert record.passed(), record.summary
