"""End-to-end orchestration: data acquisition, unsupervised decoding,
recursive correction, metric evaluation, distribution/spectral summaries,
the optional board comparison, and artifact output.

Stage failures abort with the stage name attached.  Nothing is written to
disk until every stage has finished, and a failure during the write phase
removes whatever it had already written, so an output directory never holds
a partial run.

The JSON report is deterministic for a fixed config: no timestamps, no
machine identifiers, sorted keys, and the output directory is excluded from
the config echo.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import dataio
from .correction import CorrectionTrace, correct_recursive
from .em import EMConfig, EMResult, em_fit, update_weights
from .errors import ConfigError, PipelineStageError, SymdecodeError, UndefinedMetricError
from .galton import (
    BoardAnalogyReport,
    BoardConfig,
    BoardResult,
    algorithm_board_report,
    binomial_pmf,
    clt_convergence_report,
    simulate_board,
    tv_distance,
)
from .metrics import METRIC_COLUMNS, HistogramSpec, kl_score, js_score, pcc, r_max, r_squared, rmse
from .simulate import SimConfig, make_dataset
from .spectra import count_modes, estimate_pdf, estimate_psd, gaussian_moment_screen
from .types import ActiveSpace, ObservationMatrix, TrajectorySeries, validate_dataset

SCHEMA_VERSION = 1

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a full run needs.  ``source`` selects between a generated
    dataset ('synthetic', requires ``sim``) and interchange CSV files
    ('csv', requires the two paths plus an explicit ``space``)."""

    source: str = "synthetic"
    sim: Optional[SimConfig] = None
    positions_path: Optional[str] = None
    features_path: Optional[str] = None
    space: Optional[ActiveSpace] = None
    axis: str = "x"
    em: EMConfig = field(default_factory=EMConfig)
    n_max: int = 5
    correction_mode: str = "static"
    hist: Optional[HistogramSpec] = None
    psd_segment_len: int = 256
    psd_overlap: float = 0.5
    mode_min_prominence: float = 0.1
    galton: Optional[BoardConfig] = None
    clt_max_rows: int = 64
    out_dir: Optional[str] = None
    emit_plots: bool = True

    def __post_init__(self):
        if self.source not in ("synthetic", "csv"):
            raise ConfigError(f"source must be 'synthetic' or 'csv', got {self.source!r}")
        if self.source == "synthetic" and self.sim is None:
            raise ConfigError("synthetic source requires a sim config")
        if self.source == "csv":
            if not (self.positions_path and self.features_path):
                raise ConfigError("csv source requires positions and features paths")
            for p in (self.positions_path, self.features_path):
                if not Path(p).exists():
                    raise ConfigError(f"input file does not exist: {p}")
            if self.space is None:
                raise ConfigError("csv source requires explicit space bounds")
        if self.axis not in ("x", "y"):
            raise ConfigError(f"axis must be 'x' or 'y', got {self.axis!r}")
        if self.n_max < 0:
            raise ConfigError(f"n_max must be >= 0, got {self.n_max}")
        if self.correction_mode != "static":
            raise ConfigError("run_pipeline supports only static correction")

    def resolved_space(self) -> ActiveSpace:
        return self.space if self.space is not None else self.sim.space

    def resolved_hist(self) -> HistogramSpec:
        if self.hist is not None:
            return self.hist
        s = self.resolved_space()
        return HistogramSpec(range=(s.z_min, s.z_max))


@dataclass
class PipelineResult:
    report: dict
    truth: TrajectorySeries
    observations: ObservationMatrix
    em_result: EMResult
    trace: CorrectionTrace
    level_pdfs: list
    psd_truth: object
    psd_level0: object
    psd_final: object
    board: Optional[BoardResult]
    analogy: Optional[BoardAnalogyReport]
    clt: Optional[list]
    written: list


def _echo_config(cfg: PipelineConfig) -> dict:
    space = cfg.resolved_space()
    hist = cfg.resolved_hist()
    echo = {
        "source": cfg.source,
        "axis": cfg.axis,
        "n_max": cfg.n_max,
        "correction_mode": cfg.correction_mode,
        "space": {"z_min": space.z_min, "z_max": space.z_max},
        "em": {
            "max_iters": cfg.em.max_iters,
            "loglik_tol": cfg.em.loglik_tol,
            "init_scheme": cfg.em.init_scheme,
            "weight_update": cfg.em.weight_update,
            "seed": cfg.em.seed,
        },
        "hist": {
            "bin_count": hist.bin_count,
            "range": list(hist.range),
            "smoothing_epsilon": hist.smoothing_epsilon,
        },
        "psd": {"segment_len": cfg.psd_segment_len, "overlap": cfg.psd_overlap},
        "mode_min_prominence": cfg.mode_min_prominence,
        "emit_plots": cfg.emit_plots,
    }
    if cfg.sim is not None:
        echo["sim"] = {
            "seed": cfg.sim.seed,
            "K": cfg.sim.K,
            "M": cfg.sim.M,
            "space": {"z_min": cfg.sim.space.z_min, "z_max": cfg.sim.space.z_max},
            "step_std": cfg.sim.step_std,
            "weights_range": list(cfg.sim.weights_range),
            "obs_noise_std": cfg.sim.obs_noise_std,
            "trajectory_kind": cfg.sim.trajectory_kind,
        }
    if cfg.source == "csv":
        echo["positions_path"] = str(cfg.positions_path)
        echo["features_path"] = str(cfg.features_path)
    if cfg.galton is not None:
        echo["galton"] = {
            "rows": cfg.galton.rows,
            "balls": cfg.galton.balls,
            "right_prob": cfg.galton.right_prob,
            "seed": cfg.galton.seed,
            "clt_max_rows": cfg.clt_max_rows,
        }
    return echo


def _metric_entry(fn, *args) -> dict:
    try:
        return {"value": float(fn(*args))}
    except UndefinedMetricError as exc:
        return {"value": None, "reason": str(exc)}


def metric_rows_json(trace: CorrectionTrace, truth: TrajectorySeries, hist: HistogramSpec) -> list:
    """Per-level metric rows with undefined metrics as null-with-reason."""
    rows = []
    for series in trace.levels:
        n = series.level
        p, t = series.positions, truth.positions
        rows.append(
            {
                "N": n,
                "r2": _metric_entry(r_squared, p, t),
                "rmse": _metric_entry(rmse, p, t),
                "pcc": _metric_entry(pcc, p, t),
                "r_max": {"value": r_max(trace.space.width, n)},
                "kl_score": _metric_entry(kl_score, p, t, hist),
                "js_score": _metric_entry(js_score, p, t, hist),
            }
        )
    return rows


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, PipelineStageError):
                raise PipelineStageError(name, exc) from exc
            return False

    return _Ctx()


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    log = []
    space = cfg.resolved_space()
    hist = cfg.resolved_hist()

    with _stage("data"):
        if cfg.source == "synthetic":
            ds = make_dataset(cfg.sim)
            truth = ds.traj_x if cfg.axis == "x" else ds.traj_y
            obs = ds.obs
        else:
            tx, ty, obs = dataio.ingest_csv(cfg.positions_path, cfg.features_path)
            truth = tx if cfg.axis == "x" else ty
        report_val = validate_dataset(truth, obs, space)
        if not report_val.passed:
            failed = [c for c in report_val.checks if not c.passed]
            raise SymdecodeError("; ".join(c.detail for c in failed))
        log.append(f"data: K={truth.K} M={obs.M} axis={cfg.axis}")

    with _stage("decode"):
        em_result = em_fit(obs, space, cfg.em)
        log.append(
            f"decode: iters={em_result.iters_used} "
            f"loglik={em_result.loglik_trace[-1]:.6g} scale={em_result.rescale[0]:.6g}"
        )
        alt = "raw-moment" if cfg.em.weight_update == "least-squares" else "least-squares"
        g_main, _ = update_weights(obs, em_result.prediction, mode=cfg.em.weight_update)
        g_alt, _ = update_weights(obs, em_result.prediction, mode=alt)
        denom = np.maximum(np.abs(g_main), 1e-12)
        log.append(
            f"decode: weight-update divergence {cfg.em.weight_update} vs {alt}: "
            f"max relative {float(np.max(np.abs(g_main - g_alt) / denom)):.6g}"
        )

    with _stage("correct"):
        trace = correct_recursive(
            em_result.prediction, truth, space, cfg.n_max, mode=cfg.correction_mode
        )
        cl = trace.log
        log.append(
            f"correct: depth={trace.depth} ties_nudged={cl.ties_nudged} clamps={cl.clamps}"
        )
        log.extend(f"correct: {note}" for note in cl.notes)

    with _stage("evaluate"):
        metric_rows = metric_rows_json(trace, truth, hist)

    with _stage("spectra"):
        level_pdfs = [
            estimate_pdf(s.positions, bins=hist.bin_count, range_=(space.z_min, space.z_max))
            for s in trace.levels
        ]
        truth_pdf = estimate_pdf(truth.positions, bins=hist.bin_count, range_=(space.z_min, space.z_max))
        seg = min(cfg.psd_segment_len, truth.K)
        psd_truth = estimate_psd(truth.positions, seg, cfg.psd_overlap)
        psd_level0 = estimate_psd(trace.levels[0].positions, seg, cfg.psd_overlap)
        psd_final = estimate_psd(trace.final().positions, seg, cfg.psd_overlap)
        pdf_summaries = []
        for s, pdf in zip(trace.levels, level_pdfs):
            res = s.positions - truth.positions
            try:
                screen = gaussian_moment_screen(res)
                screen_json = {
                    "skew": screen.skew,
                    "excess_kurtosis": screen.excess_kurtosis,
                    "passed": screen.passed,
                }
            except SymdecodeError as exc:
                screen_json = {"null_reason": str(exc)}
            pdf_summaries.append(
                {
                    "level": s.level,
                    "mode_count": count_modes(pdf, cfg.mode_min_prominence),
                    "residual_screen": screen_json,
                }
            )
        spectra_summaries = {
            "truth_pdf_mode_count": count_modes(truth_pdf, cfg.mode_min_prominence),
            "levels": pdf_summaries,
            "psd": {
                "segment_len": seg,
                "truth_total_power": float(_trapezoid(psd_truth.powers, psd_truth.frequencies)),
                "final_total_power": float(_trapezoid(psd_final.powers, psd_final.frequencies)),
            },
        }

    board = analogy = clt = None
    galton_json = None
    if cfg.galton is not None:
        with _stage("galton"):
            board = simulate_board(cfg.galton)
            exact = binomial_pmf(cfg.galton.rows, cfg.galton.right_prob)
            tv = tv_distance(board.empirical_pmf, exact)
            p_clt = cfg.galton.right_prob if 0 < cfg.galton.right_prob < 1 else 0.5
            clt = clt_convergence_report(cfg.clt_max_rows, p_clt)
            analogy = algorithm_board_report(
                trace, truth, bins=hist.bin_count, min_prominence=cfg.mode_min_prominence
            )
            galton_json = {
                "rows": cfg.galton.rows,
                "balls": cfg.galton.balls,
                "right_prob": cfg.galton.right_prob,
                "tv_distance_to_exact": tv,
                "clt": [{"rows": r, "kl_nats": kl} for r, kl in clt],
                "analogy_levels": [
                    {
                        "level": s.level,
                        "mode_count": s.mode_count,
                        "residual_mean": s.residual_mean,
                        "residual_std": s.residual_std,
                        "skew": s.screen.skew,
                        "excess_kurtosis": s.screen.excess_kurtosis,
                        "screen_passed": s.screen.passed,
                    }
                    for s in analogy.levels
                ],
                "bit_ones_fraction": list(analogy.bit_ones_fraction),
            }
            log.append(f"galton: tv={tv:.6g}")

    with _stage("report"):
        report = {
            "schema_version": SCHEMA_VERSION,
            "config_echo": _echo_config(cfg),
            "metric_rows": metric_rows,
            "spectra_summaries": spectra_summaries,
            "galton": galton_json,
            "log": log,
        }

    result = PipelineResult(
        report=report,
        truth=truth,
        observations=obs,
        em_result=em_result,
        trace=trace,
        level_pdfs=level_pdfs,
        psd_truth=psd_truth,
        psd_level0=psd_level0,
        psd_final=psd_final,
        board=board,
        analogy=analogy,
        clt=clt,
        written=[],
    )

    if cfg.out_dir is not None:
        _write_artifacts(cfg, result, truth_pdf)
    return result


def _metric_csv_columns(metric_rows: list) -> list:
    cols = []
    for name in METRIC_COLUMNS:
        vals = []
        for row in metric_rows:
            cell = row[name] if name == "N" else row[name].get("value")
            vals.append("" if cell is None else cell)
        cols.append(np.asarray(vals, dtype=object))
    return cols


def _write_artifacts(cfg: PipelineConfig, result: PipelineResult, truth_pdf) -> None:
    out = Path(cfg.out_dir)
    written = result.written
    try:
        with _stage("write"):
            out.mkdir(parents=True, exist_ok=True)
            written.append(dataio.write_report(out / "report.json", result.report))

            rows = result.report["metric_rows"]
            header = list(METRIC_COLUMNS)
            cols = _metric_csv_columns(rows)
            written.append(_write_object_table(out / "metric_rows.csv", header, cols))

            trace = result.trace
            t = np.arange(trace.K, dtype=np.int64)
            level_cols = [t] + [s.positions for s in trace.levels]
            level_hdr = ["t"] + [f"level{s.level}" for s in trace.levels]
            written.append(dataio.write_table(out / "corrected_levels.csv", level_hdr, level_cols))
            written.append(
                dataio.write_table(
                    out / "predictions_level0.csv",
                    ["t", "zhat", "variance"],
                    [t, trace.levels[0].positions, trace.levels[0].covariances],
                )
            )
            written.append(
                dataio.write_table(out / "truth.csv", ["t", "z"], [t, result.truth.positions])
            )

            for pdf, s in zip(result.level_pdfs, trace.levels):
                written.append(
                    dataio.write_table(
                        out / f"pdf_level{s.level}.csv",
                        ["bin_left", "bin_right", "density"],
                        [pdf.bin_edges[:-1], pdf.bin_edges[1:], pdf.densities],
                    )
                )
            written.append(
                dataio.write_table(
                    out / "pdf_truth.csv",
                    ["bin_left", "bin_right", "density"],
                    [truth_pdf.bin_edges[:-1], truth_pdf.bin_edges[1:], truth_pdf.densities],
                )
            )
            for name, psd in (
                ("psd_truth", result.psd_truth),
                ("psd_level0", result.psd_level0),
                ("psd_final", result.psd_final),
            ):
                written.append(
                    dataio.write_table(
                        out / f"{name}.csv",
                        ["frequency", "power"],
                        [psd.frequencies, psd.powers],
                    )
                )

            if result.board is not None:
                bins = np.arange(result.board.bin_counts.shape[0], dtype=np.int64)
                exact = binomial_pmf(cfg.galton.rows, cfg.galton.right_prob)
                written.append(
                    dataio.write_table(
                        out / "galton_board.csv",
                        ["bin", "count", "empirical_pmf", "exact_pmf"],
                        [bins, result.board.bin_counts, result.board.empirical_pmf, exact],
                    )
                )

            if cfg.emit_plots:
                from . import plots

                written.extend(plots.emit_plots(result, out))
    except PipelineStageError:
        for p in written:
            Path(p).unlink(missing_ok=True)
        written.clear()
        raise


def _write_object_table(path, header, cols) -> Path:
    lines = [",".join(header)]
    n = cols[0].shape[0]
    for i in range(n):
        cells = []
        for c in cols:
            v = c[i]
            if v == "":
                cells.append("")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append("%.12g" % float(v))
        lines.append(",".join(cells))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    return Path(path)
