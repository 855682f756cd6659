"""Command-line verbs: exit codes, artifacts, config file and env precedence."""

import json

import numpy as np
import pytest

import symdecode as sd
from symdecode.cli import OUT_DIR_ENV, main


def _run(argv):
    return main(list(argv))


def test_simulate_writes_interchange_csvs(tmp_path):
    rc = _run(["simulate", "--out-dir", str(tmp_path), "--seed", "3", "--k", "200", "--m", "4"])
    assert rc == 0
    assert (tmp_path / "positions.csv").exists()
    assert (tmp_path / "spikes.csv").exists()
    header = (tmp_path / "positions.csv").read_text().splitlines()[0]
    assert header == "t,x,y"
    header = (tmp_path / "spikes.csv").read_text().splitlines()[0]
    assert header == "t,n0,n1,n2,n3"


def test_decode_correct_evaluate_chain(tmp_path):
    sim_dir = tmp_path / "sim"
    rc = _run(["simulate", "--out-dir", str(sim_dir), "--seed", "4", "--k", "400", "--m", "6",
               "--obs-noise-std", "30"])
    assert rc == 0

    dec_dir = tmp_path / "dec"
    rc = _run([
        "decode", "--out-dir", str(dec_dir),
        "--positions", str(sim_dir / "positions.csv"),
        "--spikes", str(sim_dir / "spikes.csv"),
        "--max-iters", "6", "--em-seed", "4",
    ])
    assert rc == 0
    assert (dec_dir / "predictions_level0.csv").exists()
    summary = json.loads((dec_dir / "decode_summary.json").read_text())
    assert summary["iters_used"] >= 1

    cor_dir = tmp_path / "cor"
    rc = _run([
        "correct", "--out-dir", str(cor_dir),
        "--positions", str(sim_dir / "positions.csv"),
        "--predictions", str(dec_dir / "predictions_level0.csv"),
        "--n-max", "4",
    ])
    assert rc == 0
    assert (cor_dir / "corrected_levels.csv").exists()

    ev_dir = tmp_path / "ev"
    rc = _run([
        "evaluate", "--out-dir", str(ev_dir),
        "--positions", str(sim_dir / "positions.csv"),
        "--corrected", str(cor_dir / "corrected_levels.csv"),
    ])
    assert rc == 0
    metrics = json.loads((ev_dir / "metrics.json").read_text())
    ns = [row["N"] for row in metrics["metric_rows"]]
    assert ns == [0, 1, 2, 3, 4]
    assert (ev_dir / "metric_rows.csv").exists()


def test_galton_verb(tmp_path):
    rc = _run(["galton", "--out-dir", str(tmp_path), "--rows", "6", "--balls", "2000",
               "--seed", "2", "--clt-max-rows", "16", "--no-plots"])
    assert rc == 0
    data = json.loads((tmp_path / "galton.json").read_text())
    assert data["rows"] == 6
    assert data["tv_distance_to_exact"] < 0.2
    assert [entry["rows"] for entry in data["clt"]] == [4, 16]
    assert all(entry["kl_nats"] > 0.0 for entry in data["clt"])


def test_run_all_and_plot(tmp_path):
    run_dir = tmp_path / "run"
    rc = _run([
        "run-all", "--out-dir", str(run_dir),
        "--seed", "5", "--k", "800", "--m", "6", "--obs-noise-std", "40",
        "--max-iters", "6", "--em-seed", "5", "--n-max", "2",
        "--galton-rows", "6", "--balls", "3000", "--no-plots",
    ])
    assert rc == 0
    report = json.loads((run_dir / "report.json").read_text())
    assert report["schema_version"] == 1
    assert not list(run_dir.glob("*.svg"))

    rc = _run(["plot", "--run-dir", str(run_dir)])
    assert rc == 0
    assert list(run_dir.glob("*.svg"))


def test_missing_out_dir_is_config_error(tmp_path, monkeypatch):
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)
    rc = _run(["simulate", "--k", "10", "--m", "2"])
    assert rc == 2


def test_env_var_supplies_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "envout"))
    rc = _run(["simulate", "--k", "10", "--m", "2"])
    assert rc == 0
    assert (tmp_path / "envout" / "positions.csv").exists()


def test_config_file_supplies_defaults_and_flags_win(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[run]\n"
        f"out_dir = {tmp_path / 'from_ini'}\n"
        "[sim]\n"
        "seed = 9\n"
        "k = 50\n"
        "m = 3\n"
    )
    rc = _run(["simulate", "--config", str(cfg)])
    assert rc == 0
    pos = (tmp_path / "from_ini" / "positions.csv").read_text().splitlines()
    assert len(pos) == 51  # header + k rows

    # a flag overrides the same setting from the file
    rc = _run(["simulate", "--config", str(cfg), "--k", "20", "--out-dir", str(tmp_path / "flag")])
    assert rc == 0
    pos = (tmp_path / "flag" / "positions.csv").read_text().splitlines()
    assert len(pos) == 21


def test_missing_config_file_is_config_error(tmp_path):
    rc = _run(["simulate", "--config", str(tmp_path / "absent.ini"), "--out-dir", str(tmp_path)])
    assert rc == 2


def test_stage_failures_exit_nonzero_with_tag(tmp_path, capsys):
    bad_pos = tmp_path / "pos.csv"
    bad_feat = tmp_path / "feat.csv"
    from symdecode.dataio import write_features_csv, write_positions_csv

    write_positions_csv(bad_pos, [100.0, 900.0], [50.0, 60.0])
    write_features_csv(bad_feat, np.ones((2, 3)))
    rc = _run([
        "run-all", "--out-dir", str(tmp_path / "out"), "--source", "csv",
        "--positions", str(bad_pos), "--spikes", str(bad_feat),
        "--no-plots", "--no-galton",
    ])
    assert rc == 1
    err = capsys.readouterr().err
    assert "[data]" in err


def test_reports_are_byte_identical_across_runs(tmp_path):
    args = [
        "run-all", "--seed", "6", "--k", "600", "--m", "4", "--obs-noise-std", "40",
        "--max-iters", "5", "--em-seed", "6", "--n-max", "2",
        "--no-galton", "--no-plots",
    ]
    assert _run(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert _run(args + ["--out-dir", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
