"""Command-line surface of the toolkit.

Verbs: simulate, decode, correct, evaluate, galton, run-all, plot.

Every option can also be supplied through an INI config file
(``--config run.ini``); explicit command-line flags take precedence over
config values, which take precedence over built-in defaults.  The default
output directory may come from the SYMDECODE_OUT_DIR environment variable.

Exit codes: 0 success, 1 runtime failure (stage-tagged message on stderr),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .correction import CorrectionLog, CorrectionTrace, correct_recursive
from .em import EMConfig, em_fit
from .errors import ConfigError, PipelineStageError, SymdecodeError
from .galton import BoardConfig, binomial_pmf, clt_convergence_report, simulate_board, tv_distance
from .metrics import HistogramSpec
from .pipeline import PipelineConfig, metric_rows_json, run_pipeline
from .simulate import SimConfig, make_dataset
from .spectra import PdfEstimate, PsdEstimate
from .types import ActiveSpace, PredictionSeries

OUT_DIR_ENV = "SYMDECODE_OUT_DIR"


class _Config:
    """Layered option lookup: INI file section.key with type conversion."""

    def __init__(self, path=None):
        self.parser = configparser.ConfigParser()
        if path is not None:
            read = self.parser.read(path)
            if not read:
                raise ConfigError(f"config file not found: {path}")

    def get(self, section, key, conv, fallback):
        if self.parser.has_option(section, key):
            raw = self.parser.get(section, key)
            try:
                if conv is bool:
                    return self.parser.getboolean(section, key)
                return conv(raw)
            except ValueError as exc:
                raise ConfigError(f"config [{section}] {key}: cannot parse {raw!r}") from exc
        return fallback


def _pick(flag_value, cfg: _Config, section, key, conv, fallback):
    """Precedence: CLI flag > config file > built-in default."""
    if flag_value is not None:
        return flag_value
    return cfg.get(section, key, conv, fallback)


def _resolve_out_dir(args, cfg: _Config) -> Path:
    out = _pick(args.out_dir, cfg, "run", "out_dir", str, None)
    if out is None:
        out = os.environ.get(OUT_DIR_ENV)
    if out is None:
        raise ConfigError(
            f"no output directory: pass --out-dir, set [run] out_dir, or export {OUT_DIR_ENV}"
        )
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _space_from(args, cfg: _Config) -> ActiveSpace:
    z_min = _pick(args.z_min, cfg, "space", "z_min", float, 0.0)
    z_max = _pick(args.z_max, cfg, "space", "z_max", float, 200.0)
    return ActiveSpace(z_min, z_max)


def _sim_from(args, cfg: _Config, space: ActiveSpace) -> SimConfig:
    return SimConfig(
        seed=_pick(args.seed, cfg, "sim", "seed", int, 1),
        K=_pick(args.k, cfg, "sim", "k", int, 20000),
        M=_pick(args.m, cfg, "sim", "m", int, 46),
        space=space,
        step_std=_pick(args.step_std, cfg, "sim", "step_std", float, 5.0),
        weights_range=(
            _pick(args.weights_low, cfg, "sim", "weights_low", float, 0.5),
            _pick(args.weights_high, cfg, "sim", "weights_high", float, 1.5),
        ),
        obs_noise_std=_pick(args.obs_noise_std, cfg, "sim", "obs_noise_std", float, 5.0),
        trajectory_kind=_pick(args.kind, cfg, "sim", "kind", str, "bounded-random-walk"),
    )


def _em_from(args, cfg: _Config) -> EMConfig:
    return EMConfig(
        max_iters=_pick(args.max_iters, cfg, "em", "max_iters", int, 50),
        loglik_tol=_pick(args.loglik_tol, cfg, "em", "loglik_tol", float, 1e-4),
        init_scheme=_pick(args.init_scheme, cfg, "em", "init_scheme", str, "pca-first-component"),
        weight_update=_pick(args.weight_update, cfg, "em", "weight_update", str, "least-squares"),
        seed=_pick(args.em_seed, cfg, "em", "seed", int, 1),
    )


def _hist_from(args, cfg: _Config, space: ActiveSpace) -> HistogramSpec:
    return HistogramSpec(
        bin_count=_pick(args.bin_count, cfg, "metrics", "bin_count", int, 50),
        range=(space.z_min, space.z_max),
        smoothing_epsilon=_pick(
            args.smoothing_epsilon, cfg, "metrics", "smoothing_epsilon", float, 1e-6
        ),
    )


def _add_common(p):
    p.add_argument("--config", help="INI config file supplying defaults for any option")
    p.add_argument("--out-dir", help=f"output directory (or env {OUT_DIR_ENV})")


def _add_space(p):
    p.add_argument("--z-min", type=float, help="active-space lower bound (default 0)")
    p.add_argument("--z-max", type=float, help="active-space upper bound (default 200)")


def _add_sim(p):
    p.add_argument("--seed", type=int, help="simulation seed (default 1)")
    p.add_argument("--k", type=int, help="time bins (default 20000)")
    p.add_argument("--m", type=int, help="neural channels (default 46)")
    p.add_argument("--step-std", type=float, help="walk step std in cm (default 5)")
    p.add_argument("--obs-noise-std", type=float, help="emission noise std (default 5)")
    p.add_argument("--weights-low", type=float, help="true weight range low (default 0.5)")
    p.add_argument("--weights-high", type=float, help="true weight range high (default 1.5)")
    p.add_argument("--kind", choices=["bounded-random-walk", "sinusoid-mixture"], help="trajectory kind")


def _add_em(p):
    p.add_argument("--max-iters", type=int, help="EM iteration cap (default 50)")
    p.add_argument("--loglik-tol", type=float, help="stop when improvement < tol (default 1e-4)")
    p.add_argument("--init-scheme", choices=["random-seeded", "pca-first-component"])
    p.add_argument("--weight-update", choices=["least-squares", "raw-moment"])
    p.add_argument("--em-seed", type=int, help="EM init seed (default 1)")


def _add_io(p):
    p.add_argument("--positions", help="positions CSV path (header t,x,y)")
    p.add_argument("--spikes", help="neural features CSV path (header t,n0,...)")
    p.add_argument("--axis", choices=["x", "y"], help="axis to process (default x)")


def _add_metrics(p):
    p.add_argument("--bin-count", type=int, help="histogram bins for KL/JS and PDFs (default 50)")
    p.add_argument("--smoothing-epsilon", type=float, help="histogram smoothing mass (default 1e-6)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="symdecode",
        description="Unsupervised state-space position decoding with recursive midline correction.",
    )
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset as interchange CSVs")
    _add_common(p)
    _add_space(p)
    _add_sim(p)

    p = sub.add_parser("decode", help="fit the state-space model and write level-0 predictions")
    _add_common(p)
    _add_space(p)
    _add_io(p)
    _add_em(p)

    p = sub.add_parser("correct", help="apply recursive midline correction to predictions")
    _add_common(p)
    _add_space(p)
    _add_io(p)
    p.add_argument("--predictions", help="level-0 predictions CSV (t,zhat,variance)")
    p.add_argument("--n-max", type=int, help="correction depth (default 5)")

    p = sub.add_parser("evaluate", help="compute the metric table for corrected levels")
    _add_common(p)
    _add_space(p)
    _add_io(p)
    p.add_argument("--corrected", help="corrected_levels.csv from the correct verb")
    _add_metrics(p)

    p = sub.add_parser("galton", help="simulate the board and the CLT convergence report")
    _add_common(p)
    p.add_argument("--rows", type=int, help="peg rows (default 12)")
    p.add_argument("--balls", type=int, help="ball count (default 100000)")
    p.add_argument("--right-prob", type=float, help="right-step probability (default 0.5)")
    p.add_argument("--seed", type=int, help="simulation seed (default 1)")
    p.add_argument("--clt-max-rows", type=int, help="largest rows in the CLT schedule (default 64)")
    p.add_argument("--method", choices=["ball-by-ball", "direct"], help="simulation method")
    p.add_argument("--no-plots", action="store_true", help="skip SVG output")

    p = sub.add_parser("run-all", help="full pipeline: data, decode, correct, evaluate, spectra, board")
    _add_common(p)
    _add_space(p)
    _add_sim(p)
    _add_io(p)
    _add_em(p)
    _add_metrics(p)
    p.add_argument("--source", choices=["synthetic", "csv"], help="data source (default synthetic)")
    p.add_argument("--n-max", type=int, help="correction depth (default 5)")
    p.add_argument("--segment-len", type=int, help="PSD segment length (default 256)")
    p.add_argument("--overlap", type=float, help="PSD overlap fraction (default 0.5)")
    p.add_argument("--min-prominence", type=float, help="mode-count prominence (default 0.1)")
    p.add_argument("--galton-rows", type=int, help="board rows (default 12)")
    p.add_argument("--balls", type=int, help="board balls (default 100000)")
    p.add_argument("--right-prob", type=float, help="board right probability (default 0.5)")
    p.add_argument("--clt-max-rows", type=int, help="CLT schedule cap (default 64)")
    p.add_argument("--no-galton", action="store_true", help="skip the board section")
    p.add_argument("--no-plots", action="store_true", help="skip SVG output")

    p = sub.add_parser("plot", help="re-emit SVG figures from a completed run directory")
    p.add_argument("--run-dir", required=True, help="directory holding report.json and tables")

    return ap


def _cmd_simulate(args, cfg) -> int:
    out = _resolve_out_dir(args, cfg)
    space = _space_from(args, cfg)
    sim = _sim_from(args, cfg, space)
    ds = make_dataset(sim)
    dataio.write_positions_csv(out / "positions.csv", ds.traj_x.positions, ds.traj_y.positions)
    dataio.write_features_csv(out / "spikes.csv", ds.obs.values)
    print(f"wrote {out / 'positions.csv'} and {out / 'spikes.csv'} (K={sim.K}, M={sim.M})")
    return 0


def _cmd_decode(args, cfg) -> int:
    out = _resolve_out_dir(args, cfg)
    space = _space_from(args, cfg)
    positions = _pick(args.positions, cfg, "io", "positions", str, None)
    spikes = _pick(args.spikes, cfg, "io", "spikes", str, None)
    if not positions or not spikes:
        raise ConfigError("decode requires --positions and --spikes")
    axis = _pick(args.axis, cfg, "run", "axis", str, "x")
    tx, ty, obs = dataio.ingest_csv(positions, spikes)
    truth = tx if axis == "x" else ty
    result = em_fit(obs, space, _em_from(args, cfg))
    t = np.arange(truth.K, dtype=np.int64)
    dataio.write_table(
        out / "predictions_level0.csv",
        ["t", "zhat", "variance"],
        [t, result.prediction.positions, result.prediction.covariances],
    )
    summary = {
        "iters_used": result.iters_used,
        "final_loglik": float(result.loglik_trace[-1]),
        "loglik_trace": [float(v) for v in result.loglik_trace],
        "rescale": {"alpha": result.rescale[0], "beta": result.rescale[1]},
        "weights": [float(w) for w in result.params.weights],
        "offsets": [float(b) for b in result.params.offsets],
    }
    dataio.write_report(out / "decode_summary.json", summary)
    print(f"decoded axis {axis}: {result.iters_used} iterations, wrote {out / 'predictions_level0.csv'}")
    return 0


def _load_predictions(path) -> PredictionSeries:
    header, rows = dataio._read_rows(path, expected_header=["t", "zhat", "variance"])
    zhat = np.array([float(r[1]) for _, r in rows])
    var = np.array([float(r[2]) for _, r in rows])
    return PredictionSeries(level=0, positions=zhat, covariances=var)


def _cmd_correct(args, cfg) -> int:
    out = _resolve_out_dir(args, cfg)
    space = _space_from(args, cfg)
    positions = _pick(args.positions, cfg, "io", "positions", str, None)
    predictions = _pick(args.predictions, cfg, "io", "predictions", str, None)
    if not positions or not predictions:
        raise ConfigError("correct requires --positions and --predictions")
    axis = _pick(args.axis, cfg, "run", "axis", str, "x")
    n_max = _pick(args.n_max, cfg, "run", "n_max", int, 5)
    t, x, y = dataio.read_positions_csv(positions)
    truth_positions = x if axis == "x" else y
    from .types import TrajectorySeries

    truth = TrajectorySeries(axis=axis, positions=truth_positions)
    level0 = _load_predictions(predictions)
    trace = correct_recursive(level0, truth, space, n_max)
    cols = [np.arange(trace.K, dtype=np.int64)] + [s.positions for s in trace.levels]
    hdr = ["t"] + [f"level{s.level}" for s in trace.levels]
    dataio.write_table(out / "corrected_levels.csv", hdr, cols)
    dataio.write_report(
        out / "correction_summary.json",
        {
            "depth": trace.depth,
            "ties_nudged": trace.log.ties_nudged,
            "clamps": trace.log.clamps,
            "notes": list(trace.log.notes),
        },
    )
    print(f"corrected to depth {trace.depth}, wrote {out / 'corrected_levels.csv'}")
    return 0


def _cmd_evaluate(args, cfg) -> int:
    out = _resolve_out_dir(args, cfg)
    space = _space_from(args, cfg)
    positions = _pick(args.positions, cfg, "io", "positions", str, None)
    corrected = _pick(args.corrected, cfg, "io", "corrected", str, None)
    if not positions or not corrected:
        raise ConfigError("evaluate requires --positions and --corrected")
    axis = _pick(args.axis, cfg, "run", "axis", str, "x")
    t, x, y = dataio.read_positions_csv(positions)
    from .types import TrajectorySeries

    truth = TrajectorySeries(axis=axis, positions=x if axis == "x" else y)
    header, rows = dataio._read_rows(corrected)
    if header[:1] != ["t"] or len(header) < 2:
        raise ConfigError(f"{corrected}: expected header t,level0,... got {header!r}")
    K = len(rows)
    zeros = np.zeros(K)
    levels = []
    for idx, name in enumerate(header[1:]):
        vals = np.array([float(r[idx + 1]) for _, r in rows])
        levels.append(PredictionSeries(level=idx, positions=vals, covariances=zeros))
    trace = CorrectionTrace(
        space=space,
        mode="static",
        levels=tuple(levels),
        pred_bits=(),
        truth_bits=(),
        log=CorrectionLog(),
    )
    hist = _hist_from(args, cfg, space)
    rows_json = metric_rows_json(trace, truth, hist)
    dataio.write_report(out / "metrics.json", {"metric_rows": rows_json})
    from .pipeline import METRIC_COLUMNS, _metric_csv_columns, _write_object_table

    _write_object_table(out / "metric_rows.csv", list(METRIC_COLUMNS), _metric_csv_columns(rows_json))
    print(f"evaluated {len(levels)} levels, wrote {out / 'metric_rows.csv'}")
    return 0


def _cmd_galton(args, cfg) -> int:
    out = _resolve_out_dir(args, cfg)
    board_cfg = BoardConfig(
        rows=_pick(args.rows, cfg, "galton", "rows", int, 12),
        balls=_pick(args.balls, cfg, "galton", "balls", int, 100000),
        right_prob=_pick(args.right_prob, cfg, "galton", "right_prob", float, 0.5),
        seed=_pick(args.seed, cfg, "galton", "seed", int, 1),
    )
    method = _pick(args.method, cfg, "galton", "method", str, "ball-by-ball")
    clt_max = _pick(args.clt_max_rows, cfg, "galton", "clt_max_rows", int, 64)
    board = simulate_board(board_cfg, method=method)
    exact = binomial_pmf(board_cfg.rows, board_cfg.right_prob)
    tv = tv_distance(board.empirical_pmf, exact)
    p_clt = board_cfg.right_prob if 0 < board_cfg.right_prob < 1 else 0.5
    clt = clt_convergence_report(clt_max, p_clt)
    dataio.write_report(
        out / "galton.json",
        {
            "rows": board_cfg.rows,
            "balls": board_cfg.balls,
            "right_prob": board_cfg.right_prob,
            "method": method,
            "tv_distance_to_exact": tv,
            "clt": [{"rows": r, "kl_nats": kl} for r, kl in clt],
        },
    )
    bins = np.arange(board.bin_counts.shape[0], dtype=np.int64)
    dataio.write_table(
        out / "galton_board.csv",
        ["bin", "count", "empirical_pmf", "exact_pmf"],
        [bins, board.bin_counts, board.empirical_pmf, exact],
    )
    if not args.no_plots:
        from . import plots

        plots.board_plot(board, board_cfg.rows, board_cfg.right_prob, out / "galton_board.svg")
    print(f"board rows={board_cfg.rows} balls={board_cfg.balls} tv={tv:.5f}, wrote {out / 'galton.json'}")
    return 0


def _cmd_run_all(args, cfg) -> int:
    out = _resolve_out_dir(args, cfg)
    space = _space_from(args, cfg)
    source = _pick(args.source, cfg, "run", "source", str, "synthetic")
    axis = _pick(args.axis, cfg, "run", "axis", str, "x")
    n_max = _pick(args.n_max, cfg, "run", "n_max", int, 5)
    galton_enabled = not args.no_galton and cfg.get("galton", "enabled", bool, True)
    galton_cfg = None
    if galton_enabled:
        galton_cfg = BoardConfig(
            rows=_pick(args.galton_rows, cfg, "galton", "rows", int, 12),
            balls=_pick(args.balls, cfg, "galton", "balls", int, 100000),
            right_prob=_pick(args.right_prob, cfg, "galton", "right_prob", float, 0.5),
            seed=_pick(None, cfg, "galton", "seed", int, 1),
        )
    pipeline_cfg = PipelineConfig(
        source=source,
        sim=_sim_from(args, cfg, space) if source == "synthetic" else None,
        positions_path=_pick(args.positions, cfg, "io", "positions", str, None),
        features_path=_pick(args.spikes, cfg, "io", "spikes", str, None),
        space=space,
        axis=axis,
        em=_em_from(args, cfg),
        n_max=n_max,
        hist=_hist_from(args, cfg, space),
        psd_segment_len=_pick(args.segment_len, cfg, "spectra", "segment_len", int, 256),
        psd_overlap=_pick(args.overlap, cfg, "spectra", "overlap", float, 0.5),
        mode_min_prominence=_pick(args.min_prominence, cfg, "spectra", "min_prominence", float, 0.1),
        galton=galton_cfg,
        clt_max_rows=_pick(args.clt_max_rows, cfg, "galton", "clt_max_rows", int, 64),
        out_dir=str(out),
        emit_plots=not args.no_plots and cfg.get("run", "plots", bool, True),
    )
    result = run_pipeline(pipeline_cfg)
    print(f"pipeline complete: {len(result.written)} artifacts in {out}")
    for line in result.report["log"]:
        print(f"  {line}")
    return 0


def _read_pdf_csv(path) -> PdfEstimate:
    header, rows = dataio._read_rows(path, expected_header=["bin_left", "bin_right", "density"])
    left = np.array([float(r[0]) for _, r in rows])
    right = np.array([float(r[1]) for _, r in rows])
    dens = np.array([float(r[2]) for _, r in rows])
    edges = np.concatenate([left, right[-1:]])
    return PdfEstimate(bin_edges=edges, densities=dens, sample_count=0)


def _read_psd_csv(path) -> PsdEstimate:
    header, rows = dataio._read_rows(path, expected_header=["frequency", "power"])
    f = np.array([float(r[0]) for _, r in rows])
    p = np.array([float(r[1]) for _, r in rows])
    return PsdEstimate(frequencies=f, powers=p, method_params=(("source", str(path)),))


def _cmd_plot(args) -> int:
    from . import plots
    from .types import TrajectorySeries

    run_dir = Path(args.run_dir)
    report_path = run_dir / "report.json"
    if not report_path.exists():
        raise ConfigError(f"no report.json in {run_dir}")
    import json

    report = json.loads(report_path.read_text(encoding="utf-8"))
    echo = report["config_echo"]
    space = ActiveSpace(echo["space"]["z_min"], echo["space"]["z_max"])

    header, rows = dataio._read_rows(run_dir / "corrected_levels.csv")
    K = len(rows)
    levels = []
    zeros = np.zeros(K)
    for idx in range(1, len(header)):
        vals = np.array([float(r[idx]) for _, r in rows])
        levels.append(PredictionSeries(level=idx - 1, positions=vals, covariances=zeros))
    trace = CorrectionTrace(
        space=space, mode="static", levels=tuple(levels), pred_bits=(), truth_bits=(), log=CorrectionLog()
    )
    _, truth_rows = dataio._read_rows(run_dir / "truth.csv", expected_header=["t", "z"])
    truth = TrajectorySeries(
        axis=echo.get("axis", "x"), positions=np.array([float(r[1]) for _, r in truth_rows])
    )

    written = [
        plots.trajectory_overlay(truth, trace, run_dir / "trajectory_overlay.svg"),
        plots.scatter_panels(truth, trace, run_dir / "scatter_levels.svg"),
    ]
    level_pairs = []
    for s in levels:
        pdf_path = run_dir / f"pdf_level{s.level}.csv"
        if pdf_path.exists():
            level_pairs.append((_read_pdf_csv(pdf_path), s.level))
    truth_pdf_path = run_dir / "pdf_truth.csv"
    truth_pdf = _read_pdf_csv(truth_pdf_path) if truth_pdf_path.exists() else None
    if level_pairs or truth_pdf is not None:
        written.append(plots.pdf_plot(level_pairs, truth_pdf, run_dir / "pdf_levels.svg"))
    named = []
    for name in ("psd_truth", "psd_level0", "psd_final"):
        p = run_dir / f"{name}.csv"
        if p.exists():
            named.append((name.replace("psd_", ""), _read_psd_csv(p)))
    if named:
        written.append(plots.psd_plot(named, run_dir / "psd.svg"))
    if len(levels) == 1:
        print("notice: depth-0 trace, no correction plots emitted")
    print(f"re-emitted {len(written)} figures in {run_dir}")
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _Config(getattr(args, "config", None))
        if args.verb == "simulate":
            return _cmd_simulate(args, cfg)
        if args.verb == "decode":
            return _cmd_decode(args, cfg)
        if args.verb == "correct":
            return _cmd_correct(args, cfg)
        if args.verb == "evaluate":
            return _cmd_evaluate(args, cfg)
        if args.verb == "galton":
            return _cmd_galton(args, cfg)
        if args.verb == "run-all":
            return _cmd_run_all(args, cfg)
        if args.verb == "plot":
            return _cmd_plot(args)
        raise ConfigError(f"unknown verb {args.verb!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PipelineStageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except SymdecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
