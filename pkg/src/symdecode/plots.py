"""Static SVG figure emission for pipeline results.

Pure file output on the Agg backend; no display server is ever touched.
Figure families: trajectory overlay, per-level scatter against the y=x
line, position PDFs, PSD curves, residual PDFs, and the board histogram.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .galton import binomial_pmf

# stable hash salt keeps SVG element ids reproducible across processes
matplotlib.rcParams["svg.hashsalt"] = "symdecode"

_SVG_META = {"Date": None, "Creator": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def trajectory_overlay(truth, trace, path, max_bins: int = 2000) -> Path:
    """Truth, raw decode, and final corrected positions over time."""
    k = min(truth.K, max_bins)
    t = np.arange(k)
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(t, truth.positions[:k], color="black", lw=1.0, label="truth")
    ax.plot(t, trace.levels[0].positions[:k], color="tab:green", lw=0.8, alpha=0.7, label="level 0")
    if trace.depth > 0:
        ax.plot(
            t,
            trace.final().positions[:k],
            color="tab:red",
            lw=0.8,
            alpha=0.8,
            label=f"level {trace.depth}",
        )
    ax.set_xlabel("time bin")
    ax.set_ylabel("position (cm)")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("decoded trajectory vs truth")
    return _save(fig, Path(path))


def scatter_panels(truth, trace, path) -> Path:
    """One panel per level: prediction against truth with the y=x line in
    red (points on the line are perfect predictions)."""
    n_panels = trace.depth + 1
    ncols = min(n_panels, 3)
    nrows = (n_panels + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 3.2 * nrows), squeeze=False)
    lo, hi = trace.space.z_min, trace.space.z_max
    step = max(1, truth.K // 5000)  # cap point count per panel
    for i, series in enumerate(trace.levels):
        ax = axes[i // ncols][i % ncols]
        ax.plot(truth.positions[::step], series.positions[::step], ".", ms=1.5, alpha=0.4)
        ax.plot([lo, hi], [lo, hi], color="red", lw=1.0)
        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_title(f"N={series.level}", fontsize=9)
        ax.set_xlabel("truth (cm)", fontsize=8)
        ax.set_ylabel("prediction (cm)", fontsize=8)
    for j in range(n_panels, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    return _save(fig, Path(path))


def pdf_plot(level_pdfs, truth_pdf, path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    if truth_pdf is not None:
        ax.stairs(truth_pdf.densities, truth_pdf.bin_edges, color="black", lw=1.2, label="truth")
    for pdf, lvl in level_pdfs:
        ax.stairs(pdf.densities, pdf.bin_edges, lw=0.9, alpha=0.8, label=f"level {lvl}")
    ax.set_xlabel("position (cm)")
    ax.set_ylabel("density (1/cm)")
    ax.set_title("position distributions")
    ax.legend(fontsize=8)
    return _save(fig, Path(path))


def residual_pdf_plot(analogy_levels, path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    for s in analogy_levels:
        ax.stairs(s.pdf.densities, s.pdf.bin_edges, lw=0.9, alpha=0.8, label=f"level {s.level}")
    ax.set_xlabel("residual (cm)")
    ax.set_ylabel("density (1/cm)")
    ax.set_title("prediction-error distributions per level")
    ax.legend(fontsize=8)
    return _save(fig, Path(path))


def psd_plot(named_psds, path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    for name, psd in named_psds:
        ax.semilogy(psd.frequencies, np.maximum(psd.powers, 1e-12), lw=0.9, label=name)
    ax.set_xlabel("frequency (cycles/bin)")
    ax.set_ylabel("power density")
    ax.set_title("power spectral densities")
    ax.legend(fontsize=8)
    return _save(fig, Path(path))


def board_plot(board, rows: int, right_prob: float, path) -> Path:
    bins = np.arange(board.bin_counts.shape[0])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(bins, board.empirical_pmf, width=0.8, alpha=0.6, label="simulated")
    ax.plot(bins, binomial_pmf(rows, right_prob), "k.-", lw=1.0, label="exact binomial")
    ax.set_xlabel("bin (number of right steps)")
    ax.set_ylabel("probability")
    ax.set_title(f"board landing distribution, rows={rows}")
    ax.legend(fontsize=8)
    return _save(fig, Path(path))


def emit_plots(result, out_dir) -> list:
    """Write the figure set for a pipeline result; returns written paths.

    A depth-0 trace gets no correction plots (noted in stdout-free fashion:
    the caller's log already records depth), only the base figures.
    """
    out = Path(out_dir)
    written = []
    trace = result.trace
    truth = result.truth
    written.append(trajectory_overlay(truth, trace, out / "trajectory_overlay.svg"))
    written.append(scatter_panels(truth, trace, out / "scatter_levels.svg"))

    truth_pdf = None
    level_pairs = [(pdf, s.level) for pdf, s in zip(result.level_pdfs, trace.levels)]
    written.append(pdf_plot(level_pairs, truth_pdf, out / "pdf_levels.svg"))
    written.append(
        psd_plot(
            [("truth", result.psd_truth), ("level 0", result.psd_level0), ("final", result.psd_final)],
            out / "psd.svg",
        )
    )
    if result.analogy is not None:
        written.append(residual_pdf_plot(result.analogy.levels, out / "pdf_residuals.svg"))
    if result.board is not None:
        g = result.report["galton"]
        written.append(
            board_plot(result.board, g["rows"], g["right_prob"], out / "galton_board.svg")
        )
    return written
