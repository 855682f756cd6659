"""Synthetic ground-truth trajectories and neural observations from a known
linear-Gaussian model, so every downstream claim is testable without any
recorded dataset.

Everything here is a pure function of (config, seed).  Randomness comes from
``numpy.random.default_rng`` (PCG64) seeded with a ``[seed, stream]`` seed
sequence, one fixed stream id per purpose, so trajectories, parameters and
observation noise never share a stream even when the caller reuses one seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .types import ActiveSpace, ObservationMatrix, PredictionSeries, StateSpaceParams, TrajectorySeries

_TRAJ_STREAM = 11
_PARAMS_STREAM = 12
_OBS_STREAM = 13
_PRED_STREAM = 14

TRAJECTORY_KINDS = ("bounded-random-walk", "sinusoid-mixture")


@dataclass(frozen=True)
class SimConfig:
    """Configuration for one synthetic session.

    Parameters
    ----------
    seed : int
        Master seed; all derived streams are keyed off it.
    K : int
        Number of time bins.
    M : int
        Number of neural channels.
    space : ActiveSpace
        Bounded interval the trajectory must stay inside.
    step_std : float
        Per-bin standard deviation of random-walk increments, in cm.
        Zero is allowed and yields a constant trajectory.
    weights_range : (float, float)
        Uniform range the true emission weights are drawn from.
    obs_noise_std : float
        Per-channel emission noise standard deviation.
    trajectory_kind : str
        'bounded-random-walk' (reflecting boundaries) or 'sinusoid-mixture'.
    """

    seed: int
    K: int
    M: int
    space: ActiveSpace
    step_std: float = 5.0
    weights_range: tuple = (0.5, 1.5)
    obs_noise_std: float = 5.0
    trajectory_kind: str = "bounded-random-walk"

    def __post_init__(self):
        if self.K < 1 or self.M < 1:
            raise ConfigError(f"K and M must be >= 1, got K={self.K}, M={self.M}")
        if self.step_std < 0:
            raise ConfigError(f"step_std must be >= 0, got {self.step_std}")
        if not self.obs_noise_std > 0:
            raise ConfigError(f"obs_noise_std must be > 0, got {self.obs_noise_std}")
        lo, hi = self.weights_range
        if not hi >= lo:
            raise ConfigError(f"weights_range must be ordered, got {self.weights_range}")
        if self.trajectory_kind not in TRAJECTORY_KINDS:
            raise ConfigError(
                f"trajectory_kind must be one of {TRAJECTORY_KINDS}, got {self.trajectory_kind!r}"
            )


def _reflect_into(z: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Fold values into [lo, hi] by specular reflection off both walls.

    Handles arbitrarily large excursions (the fold has period 2*(hi-lo)).
    """
    width = hi - lo
    t = np.mod(z - lo, 2.0 * width)
    return lo + (width - np.abs(t - width))


def generate_trajectory(cfg: SimConfig, axis: str = "x") -> TrajectorySeries:
    """Generate one bounded ground-truth position series.

    Parameters
    ----------
    cfg : SimConfig
    axis : str
        Label ('x' or 'y') carried by the returned series.  The two axes use
        decorrelated random streams derived from the same master seed.

    Returns
    -------
    TrajectorySeries
        K positions, all inside ``cfg.space``.  Identical config (including
        seed) gives a bitwise-identical series.
    """
    rng = np.random.default_rng([cfg.seed, _TRAJ_STREAM, 0 if axis == "x" else 1])
    lo, hi = cfg.space.z_min, cfg.space.z_max

    if cfg.trajectory_kind == "sinusoid-mixture":
        k = np.arange(cfg.K, dtype=np.float64)
        freqs = rng.uniform(0.002, 0.05, size=3)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
        amps = np.array([0.5, 0.3, 0.2]) * (0.45 * cfg.space.width)
        z = cfg.space.mid + sum(
            a * np.sin(2.0 * np.pi * f * k + ph) for a, f, ph in zip(amps, freqs, phases)
        )
        return TrajectorySeries(axis=axis, positions=np.asarray(z))

    steps = rng.normal(0.0, cfg.step_std, size=cfg.K) if cfg.step_std > 0 else np.zeros(cfg.K)
    # cumulative walk from the midpoint, then fold the whole path back in;
    # folding commutes with stepping for specular walls.
    raw = cfg.space.mid + np.concatenate(([0.0], np.cumsum(steps[:-1])))
    z = _reflect_into(raw, lo, hi)
    return TrajectorySeries(axis=axis, positions=z)


def true_params(cfg: SimConfig, axis: str = "x", active_channels: Optional[slice] = None) -> StateSpaceParams:
    """Draw the ground-truth model parameters implied by a SimConfig.

    Weights are uniform on ``cfg.weights_range``; offsets are uniform on
    [0, 10); emission variances are all ``obs_noise_std**2``.  When
    ``active_channels`` is given, weights outside that slice are zero (those
    channels carry no information about this axis).

    The dynamics block describes the walk as an unbounded random walk
    (transition 1, step variance ``step_std**2``); boundary reflection is not
    representable in a linear model and is deliberately left out.
    """
    rng = np.random.default_rng([cfg.seed, _PARAMS_STREAM, 0 if axis == "x" else 1])
    weights = rng.uniform(cfg.weights_range[0], cfg.weights_range[1], size=cfg.M)
    offsets = rng.uniform(0.0, 10.0, size=cfg.M)
    if active_channels is not None:
        mask = np.zeros(cfg.M, dtype=bool)
        mask[active_channels] = True
        weights = np.where(mask, weights, 0.0)
    return StateSpaceParams(
        weights=weights,
        offsets=offsets,
        obs_noise_var=np.full(cfg.M, cfg.obs_noise_std**2),
        state_transition=1.0,
        state_noise_var=max(cfg.step_std**2, 1e-10),
        init_mean=cfg.space.mid,
        init_var=(cfg.space.width / 4.0) ** 2,
    )


def generate_observations(traj: TrajectorySeries, params: StateSpaceParams, seed: int) -> ObservationMatrix:
    """Emit a K x M observation matrix: row k is
    ``weights * z_k + offsets + noise`` with independent per-channel Gaussian
    noise of variance ``obs_noise_var``.
    """
    rng = np.random.default_rng([seed, _OBS_STREAM])
    z = traj.positions
    clean = np.outer(z, params.weights) + params.offsets
    noise = rng.normal(0.0, 1.0, size=clean.shape) * np.sqrt(params.obs_noise_var)
    return ObservationMatrix(values=clean + noise)


@dataclass(frozen=True)
class SimDataset:
    """One synthetic session over both axes sharing a single observation
    matrix: the first half of the channels encodes x, the second half y."""

    traj_x: TrajectorySeries
    traj_y: TrajectorySeries
    obs: ObservationMatrix
    params_x: StateSpaceParams
    params_y: StateSpaceParams


def make_dataset(cfg: SimConfig) -> SimDataset:
    """Generate a two-axis dataset with a split-channel emission layout.

    Channels [0, M/2) respond to x, channels [M/2, M) to y, mirroring
    recordings where different cells are tuned to different spatial
    dimensions.  Each axis can then be decoded independently: the other
    axis's channels look like structured noise to a one-dimensional model.
    """
    half = (cfg.M + 1) // 2
    traj_x = generate_trajectory(cfg, axis="x")
    traj_y = generate_trajectory(cfg, axis="y")
    params_x = true_params(cfg, axis="x", active_channels=slice(0, half))
    params_y = true_params(cfg, axis="y", active_channels=slice(half, cfg.M))

    rng = np.random.default_rng([cfg.seed, _OBS_STREAM])
    clean = (
        np.outer(traj_x.positions, params_x.weights)
        + np.outer(traj_y.positions, params_y.weights)
        + params_x.offsets
    )
    noise = rng.normal(0.0, cfg.obs_noise_std, size=clean.shape)
    return SimDataset(
        traj_x=traj_x,
        traj_y=traj_y,
        obs=ObservationMatrix(values=clean + noise),
        params_x=params_x,
        params_y=params_y,
    )


def gaussian_error_predictions(
    truth: TrajectorySeries, space: ActiveSpace, noise_std: float, seed: int
) -> PredictionSeries:
    """Construct a level-0 prediction series with additive Gaussian error.

    pred_k = z_k + e_k, e_k ~ N(0, noise_std^2), reflected back into the
    space so downstream correction sees in-bounds inputs.  Used to study how
    correction transforms a known-Gaussian error distribution.
    """
    if not noise_std > 0:
        raise ConfigError(f"noise_std must be > 0, got {noise_std}")
    rng = np.random.default_rng([seed, _PRED_STREAM])
    pred = truth.positions + rng.normal(0.0, noise_std, size=truth.K)
    pred = _reflect_into(pred, space.z_min, space.z_max)
    return PredictionSeries(level=0, positions=pred, covariances=np.full(truth.K, noise_std**2))


def cell_center_predictions(
    truth: TrajectorySeries, space: ActiveSpace, depth: int, noise_frac: float, seed: int
) -> PredictionSeries:
    """Construct predictions whose error is Gaussian *per subdivision cell*.

    The space is split into 2**depth equal cells; each prediction sits at
    the center of the cell containing its ground-truth sample, plus
    N(0, (noise_frac * cell_width)^2) jitter clipped to the cell.  The
    resulting position distribution is a mixture of one Gaussian bump per
    occupied cell, which is the regime where mode counting is meaningful.
    """
    if depth < 0:
        raise ConfigError(f"depth must be >= 0, got {depth}")
    if not 0 < noise_frac < 0.5:
        raise ConfigError(f"noise_frac must be in (0, 0.5), got {noise_frac}")
    rng = np.random.default_rng([seed, _PRED_STREAM, depth])
    n_cells = 2**depth
    cell_w = space.width / n_cells
    idx = np.floor((truth.positions - space.z_min) / cell_w).astype(np.int64)
    idx = np.clip(idx, 0, n_cells - 1)  # z exactly at z_max belongs to the last cell
    centers = space.z_min + (idx + 0.5) * cell_w
    jitter = rng.normal(0.0, noise_frac * cell_w, size=truth.K)
    pred = np.clip(centers + jitter, centers - 0.5 * cell_w + 1e-12, centers + 0.5 * cell_w - 1e-12)
    return PredictionSeries(level=0, positions=pred, covariances=np.full(truth.K, (noise_frac * cell_w) ** 2))
