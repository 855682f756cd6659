"""Recursive symmetric correction of decoded positions.

A position is encoded, level by level, as the half of the current subspace
it falls in (1 at or above the midpoint, 0 below).  Whenever a predicted
position's bit disagrees with the ground truth's bit, the prediction is
reflected about the midpoint, which places it in the truth's half.  The
recursion then descends into the truth's half and repeats.  After N levels
every prediction shares the truth's depth-N cell, so the absolute error is
at most root_width / 2**N.

Two measure-zero/floating-point details are handled explicitly and logged:

* A prediction exactly at a midpoint reflects to itself; if its bit still
  disagrees with the truth it is nudged by 1e-9 of the subspace width into
  the truth's half.
* Reflection in floats can overshoot the subspace edge by an ulp, and
  level-0 inputs may start outside their cell; positions are clamped into
  the truth's descended cell after every step, which also makes the error
  bound above hold exactly rather than up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import OutOfSubspaceError
from .types import ActiveSpace, BitSeries, PredictionSeries, TrajectorySeries

# Relative half-width by which bounds are extended before declaring a scalar
# input out of subspace, and by which midpoint ties are nudged.
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class SubspaceNode:
    """One cell of the binary subdivision hierarchy."""

    level: int
    bounds: ActiveSpace
    bit_path: tuple

    def __post_init__(self):
        object.__setattr__(self, "bit_path", tuple(int(b) for b in self.bit_path))
        if any(b not in (0, 1) for b in self.bit_path):
            raise ValueError(f"bit_path must contain only 0/1, got {self.bit_path}")
        if self.level != len(self.bit_path):
            raise ValueError(f"level {self.level} != bit_path length {len(self.bit_path)}")


def subspace_for(bit_path, root: ActiveSpace) -> SubspaceNode:
    """Resolve a bit path to its cell by successive halving (1 selects the
    upper half, 0 the lower)."""
    lo, hi = root.z_min, root.z_max
    path = tuple(int(b) for b in bit_path)
    for b in path:
        mid = (lo + hi) / 2.0
        if b:
            lo = mid
        else:
            hi = mid
    return SubspaceNode(level=len(path), bounds=ActiveSpace(lo, hi), bit_path=path)


def _check_inside(z: float, sub: SubspaceNode) -> None:
    tol = _EDGE_TOL * sub.bounds.width
    if not (sub.bounds.z_min - tol <= z <= sub.bounds.z_max + tol):
        raise OutOfSubspaceError(z, sub.bounds.z_min, sub.bounds.z_max, detail=f"level {sub.level}")


def encode_bit(z: float, sub: SubspaceNode) -> int:
    """Half-space code of ``z`` inside ``sub``: 1 iff z >= midpoint."""
    _check_inside(z, sub)
    return 1 if z >= sub.bounds.mid else 0


def correct_once(zhat: float, truth_bit: int, sub: SubspaceNode) -> float:
    """One reflection step: return ``zhat`` unchanged when its bit matches
    ``truth_bit``, otherwise its mirror image ``2*mid - zhat``.

    A midpoint tie that still violates the truth bit after reflection is
    nudged into the truth half by 1e-9 of the subspace width.
    """
    if truth_bit not in (0, 1):
        raise ValueError(f"truth_bit must be 0 or 1, got {truth_bit}")
    if encode_bit(zhat, sub) == truth_bit:
        return zhat
    mid = sub.bounds.mid
    reflected = 2.0 * mid - zhat
    if reflected == mid and truth_bit == 0:
        reflected = mid - _EDGE_TOL * sub.bounds.width
    return reflected


@dataclass
class CorrectionLog:
    """Counters for the exceptional paths taken during a recursive run."""

    ties_nudged: int = 0
    clamps: int = 0
    refit_groups: int = 0
    refit_fallbacks: int = 0
    notes: list = field(default_factory=list)

    def note(self, msg: str, cap: int = 20) -> None:
        if len(self.notes) < cap:
            self.notes.append(msg)


@dataclass(frozen=True)
class CorrectionTrace:
    """Full record of a recursive correction run.

    ``levels[n]`` holds the predictions after n correction steps
    (``levels[0]`` is the input), ``pred_bits[n]``/``truth_bits[n]`` the
    bit pair consumed at step n.  Positions at ``levels[n]`` always lie in
    the ground truth's depth-n cell.
    """

    space: ActiveSpace
    mode: str
    levels: tuple
    pred_bits: tuple
    truth_bits: tuple
    log: CorrectionLog

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def K(self) -> int:
        return self.levels[0].K

    def final(self) -> PredictionSeries:
        return self.levels[-1]


RefitHook = Callable[[np.ndarray, ActiveSpace, int], np.ndarray]


def correct_recursive(
    level0: PredictionSeries,
    truth: TrajectorySeries,
    space: ActiveSpace,
    N: int,
    mode: str = "static",
    refit_hook: Optional[RefitHook] = None,
    min_refit_samples: int = 50,
) -> CorrectionTrace:
    """Run the midline-reflection recursion from level 0 down to level N.

    The truth's bit path chooses the subspace at every level, so each level
    consumes exactly one bit of ground truth per sample.  In 'refit' mode,
    before correcting at level n >= 1, samples are grouped by their current
    cell and ``refit_hook(indices, cell, n)`` may replace that group's
    predictions; groups smaller than ``min_refit_samples`` keep their static
    values (logged).

    Returns a trace whose level-n positions provably satisfy
    ``|z_hat - z| <= space.width / 2**n``.
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if mode not in ("static", "refit"):
        raise ValueError(f"mode must be 'static' or 'refit', got {mode!r}")
    if mode == "refit" and refit_hook is None:
        raise ValueError("refit mode requires a refit_hook")
    if level0.K != truth.K:
        raise ValueError(f"length mismatch: predictions K={level0.K}, truth K={truth.K}")

    root_tol = _EDGE_TOL * space.width
    z = truth.positions
    bad = (z < space.z_min - root_tol) | (z > space.z_max + root_tol)
    if bad.any():
        k = int(np.argmax(bad))
        raise OutOfSubspaceError(float(z[k]), space.z_min, space.z_max, detail=f"truth sample {k}")
    z = np.clip(z, space.z_min, space.z_max)

    log = CorrectionLog()
    K = level0.K
    zh = np.array(level0.positions, dtype=np.float64)
    lo = np.full(K, space.z_min)
    hi = np.full(K, space.z_max)

    def clamp_into_cell():
        excursion = np.maximum(lo - zh, zh - hi)
        n_big = int((excursion > root_tol).sum())
        if n_big:
            log.clamps += n_big
            log.note(f"clamped {n_big} out-of-cell predictions (max excursion {excursion.max():.3g})")
        np.clip(zh, lo, hi, out=zh)

    clamp_into_cell()
    cov = np.array(level0.covariances, dtype=np.float64)
    levels = [PredictionSeries(level=0, positions=zh.copy(), covariances=cov)]
    pred_bits = []
    truth_bits = []

    for n in range(N):
        if mode == "refit" and n >= 1:
            cell_w = space.width / (2**n)
            cell_idx = np.rint((lo - space.z_min) / cell_w).astype(np.int64)
            for c in np.unique(cell_idx):
                members = np.flatnonzero(cell_idx == c)
                cell = ActiveSpace(float(lo[members[0]]), float(hi[members[0]]))
                if members.size < min_refit_samples:
                    log.refit_fallbacks += 1
                    log.note(f"level {n} cell {c}: {members.size} samples, static fallback")
                    continue
                replacement = np.asarray(refit_hook(members, cell, n), dtype=np.float64)
                if replacement.shape != members.shape:
                    raise ValueError("refit_hook must return one position per index")
                zh[members] = np.clip(replacement, cell.z_min, cell.z_max)
                log.refit_groups += 1

        mid = 0.5 * (lo + hi)
        tb = z >= mid
        pb = zh >= mid
        mism = pb != tb
        # reflection written as (lo+hi) - zh: lo+hi is exact for dyadic cells
        zh[mism] = (lo[mism] + hi[mism]) - zh[mism]
        ties = (zh == mid) & ~tb
        if ties.any():
            zh[ties] = mid[ties] - _EDGE_TOL * (hi[ties] - lo[ties])
            log.ties_nudged += int(ties.sum())
            log.note(f"level {n}: nudged {int(ties.sum())} midpoint ties")

        lo = np.where(tb, mid, lo)
        hi = np.where(tb, hi, mid)
        clamp_into_cell()

        pred_bits.append(BitSeries(level=n, bits=pb.astype(np.uint8)))
        truth_bits.append(BitSeries(level=n, bits=tb.astype(np.uint8)))
        levels.append(PredictionSeries(level=n + 1, positions=zh.copy(), covariances=cov))

    return CorrectionTrace(
        space=space,
        mode=mode,
        levels=tuple(levels),
        pred_bits=tuple(pred_bits),
        truth_bits=tuple(truth_bits),
        log=log,
    )
