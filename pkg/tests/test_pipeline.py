"""End-to-end pipeline: report shape, artifacts, determinism, stage tagging."""

import json

import numpy as np
import pytest

import symdecode as sd
from symdecode.dataio import write_features_csv, write_positions_csv

SPACE = sd.ActiveSpace(0.0, 200.0)


def _small_cfg(**overrides):
    base = dict(
        source="synthetic",
        sim=sd.SimConfig(seed=21, K=1200, M=6, space=SPACE, step_std=5.0, obs_noise_std=40.0),
        em=sd.EMConfig(max_iters=8, loglik_tol=1e-3, seed=21),
        n_max=3,
        galton=sd.BoardConfig(rows=8, balls=5000, right_prob=0.5, seed=21),
        clt_max_rows=16,
        emit_plots=False,
    )
    base.update(overrides)
    return sd.PipelineConfig(**base)


def test_report_shape_and_metric_rows():
    result = sd.run_pipeline(_small_cfg())
    rep = result.report
    assert set(rep) == {"schema_version", "config_echo", "metric_rows", "spectra_summaries", "galton", "log"}
    assert rep["schema_version"] == 1
    assert "out_dir" not in rep["config_echo"]
    rows = rep["metric_rows"]
    assert [r["N"] for r in rows] == [0, 1, 2, 3]
    assert [r["r_max"]["value"] for r in rows] == [200.0, 100.0, 50.0, 25.0]
    for r in rows:
        for key in ("r2", "rmse", "pcc", "kl_score", "js_score"):
            assert "value" in r[key]
    assert rep["galton"]["tv_distance_to_exact"] >= 0.0
    assert isinstance(rep["log"], list) and rep["log"]


def test_galton_stage_is_optional():
    result = sd.run_pipeline(_small_cfg(galton=None))
    assert result.report["galton"] is None
    assert result.board is None


def test_artifacts_written_and_valid_json(tmp_path):
    out = tmp_path / "run"
    result = sd.run_pipeline(_small_cfg(out_dir=out, emit_plots=True))
    names = {p.name for p in result.written}
    expected = {
        "report.json",
        "metric_rows.csv",
        "corrected_levels.csv",
        "predictions_level0.csv",
        "truth.csv",
        "pdf_truth.csv",
        "psd_truth.csv",
        "psd_level0.csv",
        "psd_final.csv",
        "galton_board.csv",
    }
    assert expected <= names
    assert {f"pdf_level{n}.csv" for n in range(4)} <= names
    svgs = [p for p in result.written if p.name.endswith(".svg")]
    assert svgs
    for p in svgs:
        assert "<svg" in p.read_text()[:400]
    for p in result.written:
        assert p.exists()
    rep = json.loads((out / "report.json").read_text())
    assert rep["schema_version"] == 1


def test_identical_config_gives_identical_report_bytes(tmp_path):
    r1 = sd.run_pipeline(_small_cfg(out_dir=tmp_path / "a"))
    r2 = sd.run_pipeline(_small_cfg(out_dir=tmp_path / "b"))
    b1 = (tmp_path / "a" / "report.json").read_bytes()
    b2 = (tmp_path / "b" / "report.json").read_bytes()
    assert b1 == b2
    assert r1.report == r2.report


def test_csv_source_round_trip(tmp_path):
    cfg_sim = sd.SimConfig(seed=22, K=600, M=5, space=SPACE, obs_noise_std=40.0)
    ds = sd.make_dataset(cfg_sim)
    ppath, fpath = tmp_path / "pos.csv", tmp_path / "feat.csv"
    write_positions_csv(ppath, ds.traj_x.positions, ds.traj_y.positions)
    write_features_csv(fpath, ds.obs.values)
    cfg = sd.PipelineConfig(
        source="csv",
        positions_path=ppath,
        features_path=fpath,
        space=SPACE,
        axis="y",
        em=sd.EMConfig(max_iters=6, seed=22),
        n_max=2,
        emit_plots=False,
    )
    result = sd.run_pipeline(cfg)
    assert result.report["config_echo"]["source"] == "csv"
    assert result.report["config_echo"]["axis"] == "y"
    assert len(result.report["metric_rows"]) == 3


def test_undefined_metrics_become_null_with_reason(tmp_path):
    # constant truth makes r2 and pcc mathematically undefined at every level
    rng = np.random.default_rng(23)
    K = 300
    x = np.full(K, 100.0)
    y = rng.uniform(0.0, 200.0, K)
    feats = np.cumsum(rng.normal(0.0, 1.0, (K, 4)), axis=0)
    ppath, fpath = tmp_path / "pos.csv", tmp_path / "feat.csv"
    write_positions_csv(ppath, x, y)
    write_features_csv(fpath, feats)
    cfg = sd.PipelineConfig(
        source="csv",
        positions_path=ppath,
        features_path=fpath,
        space=SPACE,
        axis="x",
        em=sd.EMConfig(max_iters=4, seed=23),
        n_max=1,
        emit_plots=False,
    )
    result = sd.run_pipeline(cfg)
    row0 = result.report["metric_rows"][0]
    assert row0["r2"]["value"] is None
    assert row0["r2"]["reason"]
    assert row0["pcc"]["value"] is None
    assert row0["rmse"]["value"] is not None


def test_stage_errors_carry_stage_tag(tmp_path):
    ppath, fpath = tmp_path / "pos.csv", tmp_path / "feat.csv"
    write_positions_csv(ppath, [100.0, 900.0], [50.0, 60.0])  # x out of space
    write_features_csv(fpath, np.ones((2, 3)))
    cfg = sd.PipelineConfig(
        source="csv",
        positions_path=ppath,
        features_path=fpath,
        space=SPACE,
        em=sd.EMConfig(max_iters=2),
        n_max=1,
        emit_plots=False,
    )
    with pytest.raises(sd.PipelineStageError) as ei:
        sd.run_pipeline(cfg)
    assert ei.value.stage == "data"
    assert str(ei.value).startswith("[data]")


def test_pipeline_config_validation(tmp_path):
    with pytest.raises(sd.ConfigError):
        sd.PipelineConfig(source="parquet", sim=None)
    with pytest.raises(sd.ConfigError):
        sd.PipelineConfig(source="csv", positions_path=tmp_path / "nope.csv", features_path=tmp_path / "nope2.csv", space=SPACE)
    with pytest.raises(sd.ConfigError):
        _small_cfg(n_max=-1)
    with pytest.raises(sd.ConfigError):
        _small_cfg(correction_mode="refit")


def test_spectra_summaries_content():
    result = sd.run_pipeline(_small_cfg())
    spec = result.report["spectra_summaries"]
    levels = spec["levels"]
    assert [lvl["level"] for lvl in levels] == [0, 1, 2, 3]
    for lvl in levels:
        assert lvl["mode_count"] >= 0
        screen = lvl["residual_screen"]
        assert ("passed" in screen) or ("null_reason" in screen)
    assert spec["truth_pdf_mode_count"] >= 1
    assert spec["psd"]["segment_len"] <= 256
    assert spec["psd"]["truth_total_power"] >= 0.0
    assert spec["psd"]["final_total_power"] >= 0.0
