"""Core domain types: bounded 1-D movement spaces, trajectories, neural
observation matrices, linear-Gaussian model parameters, and prediction/bit
series.

All types are immutable value records after construction (arrays are made
read-only), so they can be shared freely across concurrent tasks.

Construction enforces *structural* invariants (shapes, positivity of
variances).  Data-content invariants (finiteness, bounds containment,
length pairing) are checked by :func:`validate_dataset`, which reports
violations instead of aborting, so that broken datasets can be diagnosed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _frozen_array(obj, name: str, value, dtype=np.float64, ndim: int = 1) -> None:
    arr = np.array(value, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    arr.flags.writeable = False
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True)
class ActiveSpace:
    """Bounded 1-D interval a movement axis occupies; root of the
    subdivision hierarchy."""

    z_min: float
    z_max: float

    def __post_init__(self):
        object.__setattr__(self, "z_min", float(self.z_min))
        object.__setattr__(self, "z_max", float(self.z_max))
        if not (np.isfinite(self.z_min) and np.isfinite(self.z_max)):
            raise ValueError("space bounds must be finite")
        if not self.z_max > self.z_min:
            raise ValueError(f"z_max must exceed z_min, got [{self.z_min}, {self.z_max}]")

    @property
    def width(self) -> float:
        return self.z_max - self.z_min

    @property
    def mid(self) -> float:
        """Exact midpoint (z_min + z_max) / 2, plain float arithmetic."""
        return (self.z_min + self.z_max) / 2.0

    def contains(self, z: float, tol: float = 0.0) -> bool:
        return (self.z_min - tol) <= z <= (self.z_max + tol)


@dataclass(frozen=True)
class TrajectorySeries:
    """Ground-truth positions along one axis, indexed by time bin."""

    axis: str
    positions: np.ndarray

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        _frozen_array(self, "positions", self.positions)
        if self.K < 1:
            raise ValueError("trajectory must contain at least one sample")

    @property
    def K(self) -> int:
        return int(self.positions.shape[0])


@dataclass(frozen=True)
class ObservationMatrix:
    """K x M matrix of per-time-bin neural features (spike counts for real
    recordings, real-valued emissions for synthetic data)."""

    values: np.ndarray

    def __post_init__(self):
        _frozen_array(self, "values", self.values, ndim=2)
        if self.K < 1 or self.M < 1:
            raise ValueError(f"observation matrix must be non-empty, got shape {self.values.shape}")

    @property
    def K(self) -> int:
        return int(self.values.shape[0])

    @property
    def M(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class StateSpaceParams:
    """Parameters of the per-axis linear-Gaussian state-space model.

    Emission:   S_k = weights * z_k + offsets + noise,  noise_j ~ N(0, obs_noise_var_j)
    Dynamics:   z_{k+1} = state_transition * z_k + w_k,  w_k ~ N(0, state_noise_var)
    Initial:    z_1 ~ N(init_mean, init_var)
    """

    weights: np.ndarray
    offsets: np.ndarray
    obs_noise_var: np.ndarray
    state_transition: float
    state_noise_var: float
    init_mean: float
    init_var: float

    def __post_init__(self):
        _frozen_array(self, "weights", self.weights)
        _frozen_array(self, "offsets", self.offsets)
        _frozen_array(self, "obs_noise_var", self.obs_noise_var)
        for name in ("state_transition", "state_noise_var", "init_mean", "init_var"):
            object.__setattr__(self, name, float(getattr(self, name)))
        m = self.weights.shape[0]
        if self.offsets.shape[0] != m or self.obs_noise_var.shape[0] != m:
            raise ValueError(
                "weights, offsets and obs_noise_var must share length, got "
                f"{m}, {self.offsets.shape[0]}, {self.obs_noise_var.shape[0]}"
            )
        if not np.all(np.isfinite(self.weights)) or not np.all(np.isfinite(self.offsets)):
            raise ValueError("weights and offsets must be finite")
        if not np.all(self.obs_noise_var > 0):
            raise ValueError("all observation noise variances must be > 0")
        if not (self.state_noise_var > 0 and self.init_var > 0):
            raise ValueError("state_noise_var and init_var must be > 0")

    @property
    def M(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True)
class PredictionSeries:
    """Predicted positions and their posterior variances at one correction
    level (level 0 is the raw unsupervised decode)."""

    level: int
    positions: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        _frozen_array(self, "positions", self.positions)
        _frozen_array(self, "covariances", self.covariances)
        if self.positions.shape != self.covariances.shape:
            raise ValueError("positions and covariances must have equal length")
        if np.any(self.covariances < 0):
            raise ValueError("covariances must be >= 0")

    @property
    def K(self) -> int:
        return int(self.positions.shape[0])


@dataclass(frozen=True)
class BitSeries:
    """Per-sample half-space codes (0 below the midline, 1 at or above) at
    one subdivision level."""

    level: int
    bits: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        _frozen_array(self, "bits", self.bits, dtype=np.uint8)
        if self.bits.size and not np.all((self.bits == 0) | (self.bits == 1)):
            raise ValueError("bits must contain only 0 or 1")

    @property
    def K(self) -> int:
        return int(self.bits.shape[0])


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str
    first_bad_index: Optional[int] = None


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    checks: tuple = field(default_factory=tuple)

    def check(self, name: str) -> ValidationCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_dataset(
    traj: TrajectorySeries, obs: ObservationMatrix, space: ActiveSpace
) -> ValidationReport:
    """Check a trajectory/observation pair against its active space.

    Reports (rather than aborts on) each violated invariant, with the index
    of the first offending sample: length pairing, bounds containment of the
    trajectory, and finiteness of both series.
    """
    checks = []

    ok = obs.K == traj.K
    checks.append(
        ValidationCheck(
            "length",
            ok,
            "row counts match" if ok else f"length mismatch: trajectory K={traj.K}, observations K={obs.K}",
        )
    )

    inside = (traj.positions >= space.z_min) & (traj.positions <= space.z_max)
    # NaN positions are a finiteness problem, not a bounds problem.
    inside |= ~np.isfinite(traj.positions)
    if bool(inside.all()):
        checks.append(ValidationCheck("bounds", True, "all positions within the active space"))
    else:
        idx = int(np.argmin(inside))
        checks.append(
            ValidationCheck(
                "bounds",
                False,
                f"position {traj.positions[idx]!r} outside [{space.z_min}, {space.z_max}]",
                first_bad_index=idx,
            )
        )

    bad_traj = ~np.isfinite(traj.positions)
    bad_obs = ~np.isfinite(obs.values).all(axis=1)
    if bad_traj.any():
        idx = int(np.argmax(bad_traj))
        checks.append(
            ValidationCheck("finiteness", False, f"non-finite position at sample {idx}", first_bad_index=idx)
        )
    elif bad_obs.any():
        idx = int(np.argmax(bad_obs))
        checks.append(
            ValidationCheck("finiteness", False, f"non-finite observation in row {idx}", first_bad_index=idx)
        )
    else:
        checks.append(ValidationCheck("finiteness", True, "all entries finite"))

    return ValidationReport(passed=all(c.passed for c in checks), checks=tuple(checks))
