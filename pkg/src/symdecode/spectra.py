"""Distribution and spectral summaries of position and residual series:
histogram PDF estimates, Welch-averaged power spectral densities, peak-based
mode counting, and Gaussian moment screens.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sp_signal
from scipy import stats as sp_stats

from .errors import DegenerateInputError
from .types import PredictionSeries, TrajectorySeries


@dataclass(frozen=True)
class PdfEstimate:
    """Normalized histogram density: densities[i] applies between
    bin_edges[i] and bin_edges[i+1]; the density integrates to 1."""

    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int

    def __post_init__(self):
        edges = np.array(self.bin_edges, dtype=np.float64)
        dens = np.array(self.densities, dtype=np.float64)
        edges.flags.writeable = False
        dens.flags.writeable = False
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "densities", dens)
        if edges.ndim != 1 or dens.ndim != 1 or edges.size != dens.size + 1:
            raise ValueError("bin_edges must have exactly one more entry than densities")
        if np.any(dens < 0):
            raise ValueError("densities must be >= 0")
        total = float(np.sum(dens * np.diff(edges)))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"density must integrate to 1, got {total}")

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class PsdEstimate:
    """Averaged-periodogram spectrum on a unit sampling rate: frequencies in
    cycles per time bin, in [0, 0.5]."""

    frequencies: np.ndarray
    powers: np.ndarray
    method_params: tuple

    def __post_init__(self):
        f = np.array(self.frequencies, dtype=np.float64)
        p = np.array(self.powers, dtype=np.float64)
        f.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "powers", p)
        object.__setattr__(self, "method_params", tuple(self.method_params))
        if f.shape != p.shape:
            raise ValueError("frequencies and powers must have equal length")
        if np.any(p < -1e-15):
            raise ValueError("powers must be >= 0")
        if f.size and (f.min() < 0 or f.max() > 0.5 + 1e-12):
            raise ValueError("frequencies must lie in [0, 0.5] cycles/bin")


def estimate_pdf(series, bins: int, range_: tuple) -> PdfEstimate:
    """Histogram density estimate over a fixed range.

    Values outside the range are clipped into the edge bins so the estimate
    always integrates to 1 over the stated support.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    s = np.asarray(series, dtype=np.float64).ravel()
    if s.size == 0:
        raise DegenerateInputError("cannot estimate a pdf from an empty series")
    lo, hi = float(range_[0]), float(range_[1])
    if not hi > lo:
        raise ValueError(f"range must be increasing, got {range_}")
    s = np.clip(s, lo, hi)
    densities, edges = np.histogram(s, bins=bins, range=(lo, hi), density=True)
    return PdfEstimate(bin_edges=edges, densities=densities, sample_count=s.size)


def estimate_psd(series, segment_len: int = 256, overlap_fraction: float = 0.5) -> PsdEstimate:
    """Welch power spectral density: per-segment mean removal, Hann window,
    overlapping segments, averaged magnitude-squared spectra.
    """
    s = np.asarray(series, dtype=np.float64).ravel()
    if segment_len < 4:
        raise ValueError(f"segment_len must be >= 4, got {segment_len}")
    if segment_len > s.size:
        raise ValueError(f"segment_len {segment_len} exceeds series length {s.size}")
    if not 0 <= overlap_fraction < 1:
        raise ValueError(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    noverlap = int(segment_len * overlap_fraction)
    freqs, powers = sp_signal.welch(
        s,
        fs=1.0,
        window="hann",
        nperseg=segment_len,
        noverlap=noverlap,
        detrend="constant",
        scaling="density",
    )
    method = (
        ("segment_length", segment_len),
        ("overlap_fraction", overlap_fraction),
        ("window", "hann"),
        ("detrend", "per-segment mean removal"),
    )
    return PsdEstimate(frequencies=freqs, powers=np.maximum(powers, 0.0), method_params=method)


def count_modes(pdf: PdfEstimate, min_prominence: float = 0.1) -> int:
    """Number of well-separated bumps in a histogram density.

    The density is smoothed with a 3-bin moving average (edge-replicated),
    then local maxima with prominence above ``min_prominence`` times the
    smoothed maximum are counted.  A zero pad on both sides lets bumps at
    the support boundary count as peaks.
    """
    if not 0 < min_prominence <= 1:
        raise ValueError(f"min_prominence must be in (0, 1], got {min_prominence}")
    d = pdf.densities
    padded = np.pad(d, 1, mode="edge")
    smoothed = (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0
    peak_floor = float(smoothed.max())
    if peak_floor <= 0.0:
        return 0
    guarded = np.concatenate(([0.0], smoothed, [0.0]))
    peaks, _ = sp_signal.find_peaks(guarded, prominence=min_prominence * peak_floor)
    return int(peaks.size)


def noise_series(pred: PredictionSeries, truth: TrajectorySeries) -> np.ndarray:
    """Elementwise prediction error (residual) series, prediction minus truth."""
    if pred.K != truth.K:
        raise DegenerateInputError(f"length mismatch: predictions K={pred.K}, truth K={truth.K}")
    return pred.positions - truth.positions


@dataclass(frozen=True)
class MomentScreen:
    """Skewness / excess-kurtosis screen for approximate Gaussianity."""

    skew: float
    excess_kurtosis: float
    skew_limit: float
    kurtosis_limit: float

    @property
    def passed(self) -> bool:
        return abs(self.skew) < self.skew_limit and abs(self.excess_kurtosis) < self.kurtosis_limit


def gaussian_moment_screen(
    residuals, skew_limit: float = 0.2, kurtosis_limit: float = 0.5
) -> MomentScreen:
    r = np.asarray(residuals, dtype=np.float64).ravel()
    if r.size < 8:
        raise DegenerateInputError("moment screen needs at least 8 samples")
    if float(np.std(r)) == 0.0:
        raise DegenerateInputError("moment screen undefined for a constant series")
    return MomentScreen(
        skew=float(sp_stats.skew(r)),
        excess_kurtosis=float(sp_stats.kurtosis(r, fisher=True)),
        skew_limit=skew_limit,
        kurtosis_limit=kurtosis_limit,
    )
