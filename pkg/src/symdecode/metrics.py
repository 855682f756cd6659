"""Evaluation metrics for decoded-versus-true position series: coefficient
of determination, RMSE, Pearson correlation, the per-level robustness range,
and histogram-based KL / Jensen-Shannon scores.

Undefined values (constant inputs, empty series) raise typed errors instead
of returning NaN, so pipelines cannot silently average garbage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correction import CorrectionTrace
from .errors import DegenerateInputError, UndefinedMetricError
from .types import TrajectorySeries

#: Fixed serialization order for metric rows, everywhere they are written.
METRIC_COLUMNS = ("N", "r2", "rmse", "pcc", "r_max", "kl_score", "js_score")

_LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class HistogramSpec:
    """Binning and smoothing used for the distribution-divergence scores.

    smoothing_epsilon is added to every bin's probability mass before
    renormalizing, which removes zero-bin divergences.
    """

    bin_count: int = 50
    range: tuple = (0.0, 200.0)
    smoothing_epsilon: float = 1e-6

    def __post_init__(self):
        if self.bin_count < 2:
            raise ValueError(f"bin_count must be >= 2, got {self.bin_count}")
        lo, hi = self.range
        if not hi > lo:
            raise ValueError(f"range must be increasing, got {self.range}")
        if not self.smoothing_epsilon > 0:
            raise ValueError(f"smoothing_epsilon must be > 0, got {self.smoothing_epsilon}")


@dataclass(frozen=True)
class MetricRow:
    N: int
    r2: float
    rmse: float
    pcc: float
    r_max: float
    kl_score: float
    js_score: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in METRIC_COLUMNS)


def _paired(pred, truth):
    p = np.asarray(pred, dtype=np.float64).ravel()
    t = np.asarray(truth, dtype=np.float64).ravel()
    if p.size == 0:
        raise DegenerateInputError("empty series")
    if p.size != t.size:
        raise DegenerateInputError(f"length mismatch: {p.size} vs {t.size}")
    return p, t


def r_squared(pred, truth, variant: str = "standard") -> float:
    """Coefficient of determination 1 - SS_res / SS_tot.

    variant='standard' centers the denominator on the truth mean;
    variant='prediction-centered' centers it on the prediction mean (an
    alternative reading of the same formula kept for comparison).  Raises
    when the denominator vanishes.
    """
    p, t = _paired(pred, truth)
    if variant == "standard":
        center = t.mean()
    elif variant == "prediction-centered":
        center = p.mean()
    else:
        raise ValueError(f"unknown variant {variant!r}")
    denom = float(np.sum((t - center) ** 2))
    if denom == 0.0:
        raise UndefinedMetricError(f"r_squared denominator is zero (variant={variant})")
    return 1.0 - float(np.sum((p - t) ** 2)) / denom


def rmse(pred, truth) -> float:
    p, t = _paired(pred, truth)
    return float(np.sqrt(np.mean((p - t) ** 2)))


def pcc(pred, truth) -> float:
    """Pearson product-moment correlation; undefined for constant input."""
    p, t = _paired(pred, truth)
    dp = p - p.mean()
    dt = t - t.mean()
    sp = float(np.sqrt(np.sum(dp**2)))
    st = float(np.sqrt(np.sum(dt**2)))
    if sp == 0.0 or st == 0.0:
        raise UndefinedMetricError("pcc undefined: constant input series")
    return float(np.sum(dp * dt)) / (sp * st)


def r_max(L: float, N: int) -> float:
    """Worst-case residual after N correction levels: L / 2**N."""
    if not L > 0:
        raise ValueError(f"L must be > 0, got {L}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    return L / float(2**N)


def smoothed_pmf(series, spec: HistogramSpec) -> np.ndarray:
    """Histogram a series into the given bins and return the
    epsilon-smoothed probability mass function.

    Values are clipped to the histogram range first, so edge bins absorb
    outliers and total mass is always 1.
    """
    s = np.asarray(series, dtype=np.float64).ravel()
    if s.size == 0:
        raise DegenerateInputError("cannot histogram an empty series")
    s = np.clip(s, spec.range[0], spec.range[1])
    counts, _ = np.histogram(s, bins=spec.bin_count, range=spec.range)
    pmf = counts / counts.sum()
    return (pmf + spec.smoothing_epsilon) / (1.0 + spec.bin_count * spec.smoothing_epsilon)


def _kl_pmf(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log(p / q)))


def _check_log_base(log_base: str) -> None:
    if log_base not in ("e", "2"):
        raise ValueError(f"log_base must be 'e' or '2', got {log_base!r}")


def kl_score(pred, truth, spec: HistogramSpec, log_base: str = "e") -> float:
    """KL divergence between the binned distributions of the two series,
    in nats (log_base='e', default) or bits (log_base='2')."""
    _check_log_base(log_base)
    v = _kl_pmf(smoothed_pmf(pred, spec), smoothed_pmf(truth, spec))
    return v / _LN2 if log_base == "2" else v


def js_score(pred, truth, spec: HistogramSpec, log_base: str = "e") -> float:
    """Jensen-Shannon divergence 0.5*KL(p,m) + 0.5*KL(q,m), m=(p+q)/2.

    Symmetric by construction (bitwise: m and the two-term sum are both
    order-insensitive) and bounded by ln 2.
    """
    _check_log_base(log_base)
    p = smoothed_pmf(pred, spec)
    q = smoothed_pmf(truth, spec)
    m = 0.5 * (p + q)
    v = 0.5 * _kl_pmf(p, m) + 0.5 * _kl_pmf(q, m)
    return v / _LN2 if log_base == "2" else v


def metric_table(
    trace: CorrectionTrace,
    truth: TrajectorySeries,
    spec: HistogramSpec,
    r2_variant: str = "standard",
) -> list:
    """One MetricRow per correction level 0..N of the trace."""
    if trace.K != truth.K:
        raise DegenerateInputError(f"trace K={trace.K} does not match truth K={truth.K}")
    rows = []
    for series in trace.levels:
        n = series.level
        rows.append(
            MetricRow(
                N=n,
                r2=r_squared(series.positions, truth.positions, variant=r2_variant),
                rmse=rmse(series.positions, truth.positions),
                pcc=pcc(series.positions, truth.positions),
                r_max=r_max(trace.space.width, n),
                kl_score=kl_score(series.positions, truth.positions, spec),
                js_score=js_score(series.positions, truth.positions, spec),
            )
        )
    return rows
