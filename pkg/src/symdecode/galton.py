"""Galton-board simulation and the board/correction correspondence report.

A ball falling through ``rows`` peg rows takes that many independent
left/right decisions, so the landing-bin law is Binomial(rows, right_prob)
and approaches a normal law as rows grows.  The correction recursion makes
the same kind of one-bit decision per level, and the correspondence report
packages that analogy as data: per level, the bit decisions taken, the
residual distribution, its mode count, and a Gaussian moment screen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correction import CorrectionTrace
from .errors import ConfigError, DegenerateInputError
from .spectra import MomentScreen, PdfEstimate, count_modes, estimate_pdf, gaussian_moment_screen
from .types import TrajectorySeries

_BALL_CHUNK = 8_000_000  # elements per simulation chunk, caps memory


@dataclass(frozen=True)
class BoardConfig:
    rows: int
    balls: int
    right_prob: float
    seed: int

    def __post_init__(self):
        if self.rows < 0:
            raise ConfigError(f"rows must be >= 0, got {self.rows}")
        if self.balls < 1:
            raise ConfigError(f"balls must be >= 1, got {self.balls}")
        if not 0.0 <= self.right_prob <= 1.0:
            raise ConfigError(f"right_prob must be in [0, 1], got {self.right_prob}")


@dataclass(frozen=True)
class BoardResult:
    bin_counts: np.ndarray
    empirical_pmf: np.ndarray

    def __post_init__(self):
        counts = np.array(self.bin_counts, dtype=np.int64)
        pmf = np.array(self.empirical_pmf, dtype=np.float64)
        counts.flags.writeable = False
        pmf.flags.writeable = False
        object.__setattr__(self, "bin_counts", counts)
        object.__setattr__(self, "empirical_pmf", pmf)

    @property
    def balls(self) -> int:
        return int(self.bin_counts.sum())


def simulate_board(cfg: BoardConfig, method: str = "ball-by-ball") -> BoardResult:
    """Drop ``cfg.balls`` balls through the board.

    method='ball-by-ball' materializes every peg decision (one Bernoulli
    draw per ball per row), mirroring the physical traversal.
    method='direct' samples each ball's bin straight from the binomial law;
    it is faster and must agree in distribution.
    """
    if method not in ("ball-by-ball", "direct"):
        raise ConfigError(f"method must be 'ball-by-ball' or 'direct', got {method!r}")
    rng = np.random.default_rng([cfg.seed, 21])
    n_bins = cfg.rows + 1
    counts = np.zeros(n_bins, dtype=np.int64)
    if method == "direct":
        bins = rng.binomial(cfg.rows, cfg.right_prob, size=cfg.balls)
        counts += np.bincount(bins, minlength=n_bins)
    elif cfg.rows == 0:
        counts[0] = cfg.balls
    else:
        chunk = max(1, _BALL_CHUNK // cfg.rows)
        done = 0
        while done < cfg.balls:
            b = min(chunk, cfg.balls - done)
            rights = (rng.random((b, cfg.rows)) < cfg.right_prob).sum(axis=1)
            counts += np.bincount(rights, minlength=n_bins)
            done += b
    return BoardResult(bin_counts=counts, empirical_pmf=counts / cfg.balls)


def binomial_pmf(rows: int, right_prob: float) -> np.ndarray:
    """Exact Binomial(rows, right_prob) pmf over bins 0..rows.

    Anchored at the distribution mode via log-gamma, then filled outward by
    the multiplicative ratio recurrence, so no factorial overflow occurs and
    skewed cases do not underflow to an all-zero vector (far tails may still
    round to zero, which is their correct double value).
    """
    if rows < 0:
        raise ConfigError(f"rows must be >= 0, got {rows}")
    if not 0.0 <= right_prob <= 1.0:
        raise ConfigError(f"right_prob must be in [0, 1], got {right_prob}")
    n, p = rows, right_prob
    pmf = np.zeros(n + 1)
    if p == 0.0:
        pmf[0] = 1.0
        return pmf
    if p == 1.0:
        pmf[n] = 1.0
        return pmf
    mode = min(int((n + 1) * p), n)
    log_at_mode = (
        math.lgamma(n + 1)
        - math.lgamma(mode + 1)
        - math.lgamma(n - mode + 1)
        + mode * math.log(p)
        + (n - mode) * math.log1p(-p)
    )
    pmf[mode] = math.exp(log_at_mode)
    ratio = p / (1.0 - p)
    for k in range(mode, n):  # upward: pmf[k+1]/pmf[k] = (n-k)/(k+1) * ratio
        pmf[k + 1] = pmf[k] * ((n - k) / (k + 1.0)) * ratio
    for k in range(mode, 0, -1):  # downward: pmf[k-1]/pmf[k] = k/(n-k+1) / ratio
        pmf[k - 1] = pmf[k] * (k / (n - k + 1.0)) / ratio
    return pmf


def tv_distance(p, q) -> float:
    """Total variation distance between two pmfs: half the L1 distance."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DegenerateInputError(f"pmf shapes differ: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def _discretized_normal(n: int, mean: float, var: float) -> np.ndarray:
    k = np.arange(n + 1, dtype=np.float64)
    dens = np.exp(-0.5 * (k - mean) ** 2 / var) / math.sqrt(2.0 * math.pi * var)
    return dens / dens.sum()


def clt_convergence_report(max_rows: int, p: float) -> list:
    """KL divergence from the exact binomial to its moment-matched normal
    (bin-center discretized and renormalized on the same support), for a
    geometric rows schedule 4, 16, 64, ... up to max_rows.

    Returns [(rows, kl_nats), ...]; the divergence shrinks as rows grows,
    which is the central-limit behavior made quantitative.
    """
    if max_rows < 2:
        raise ConfigError(f"max_rows must be >= 2, got {max_rows}")
    if not 0.0 < p < 1.0:
        raise ConfigError(f"p must be in (0, 1), got {p}")
    schedule = []
    r = 4
    while r <= max_rows:
        schedule.append(r)
        r *= 4
    if not schedule:
        schedule = [max_rows]
    out = []
    for rows in schedule:
        pm = binomial_pmf(rows, p)
        qm = _discretized_normal(rows, rows * p, rows * p * (1.0 - p))
        support = pm > 0
        if np.any(support & (qm == 0.0)):
            raise DegenerateInputError(f"normal discretization underflowed at rows={rows}")
        kl = float(np.sum(pm[support] * np.log(pm[support] / qm[support])))
        out.append((rows, kl))
    return out


@dataclass(frozen=True)
class LevelResidualSummary:
    level: int
    pdf: PdfEstimate
    mode_count: int
    screen: MomentScreen
    residual_mean: float
    residual_std: float


@dataclass(frozen=True)
class BoardAnalogyReport:
    """Per-level evidence for the board/correction analogy: the one-bit
    decisions act like peg rows, residual distributions like bin loads."""

    levels: tuple  # LevelResidualSummary for n = 0..depth
    bit_ones_fraction: tuple  # fraction of 1-decisions per consumed level


def algorithm_board_report(
    trace: CorrectionTrace,
    truth: TrajectorySeries,
    bins: int = 50,
    min_prominence: float = 0.1,
) -> BoardAnalogyReport:
    """Summarize a correction trace in board terms.

    Per level n: residual pdf over the level's worst-case range
    [-w/2**n, +w/2**n], its mode count, and the Gaussian moment screen.
    A depth-0 trace yields only the level-0 residual summary.
    """
    if trace.K != truth.K:
        raise DegenerateInputError(f"trace K={trace.K} does not match truth K={truth.K}")
    width = trace.space.width
    summaries = []
    for series in trace.levels:
        n = series.level
        res = series.positions - truth.positions
        half_range = width / (2.0**n)
        pdf = estimate_pdf(res, bins=bins, range_=(-half_range, half_range))
        summaries.append(
            LevelResidualSummary(
                level=n,
                pdf=pdf,
                mode_count=count_modes(pdf, min_prominence=min_prominence),
                screen=gaussian_moment_screen(res),
                residual_mean=float(res.mean()),
                residual_std=float(res.std()),
            )
        )
    ones = tuple(float(b.bits.mean()) for b in trace.truth_bits)
    return BoardAnalogyReport(levels=tuple(summaries), bit_ones_fraction=ones)
