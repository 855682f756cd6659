"""Unsupervised decoding: Kalman filtering/smoothing of a scalar latent
state under a many-channel linear-Gaussian emission model, wrapped in an
EM parameter-estimation loop.

The filter runs in information form.  With emission covariance R diagonal
and a scalar state, every per-step quantity collapses to a handful of
scalars that can be precomputed for the whole series at once:

    i_obs   = sum_j w_j^2 / r_j                    (observation precision)
    u_k     = sum_j w_j (S_kj - b_j) / r_j
    s2_k    = sum_j (S_kj - b_j)^2 / r_j

so each step costs O(1) after an O(K M) setup.  The per-step Gaussian
log-density uses the rank-one forms of the innovation determinant and
quadratic (matrix-determinant lemma / Sherman-Morrison):

    ln det(R + P w w^T)  = sum_j ln r_j + ln(1 + P i_obs)
    e^T (R + P w w^T)^-1 e = e^T R^-1 e - P (w^T R^-1 e)^2 / (1 + P i_obs)

Log-likelihood totals are accumulated with math.fsum so that iteration-to-
iteration comparisons are meaningful at the 1e-8 level even for long series.

An unsupervised fit recovers the latent trajectory only up to an affine
ambiguity (and in particular up to sign).  em_fit therefore maps the
smoothed latent series onto the caller's active space by matching its
min/max to the space bounds, and reports emission/initial-state parameters
in those active-space units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, EMError, FilterError
from .types import ActiveSpace, ObservationMatrix, PredictionSeries, StateSpaceParams

_LN_2PI = math.log(2.0 * math.pi)
_VAR_FLOOR = 1e-10

WEIGHT_UPDATE_MODES = ("least-squares", "raw-moment")
INIT_SCHEMES = ("random-seeded", "pca-first-component")

_INIT_STREAM = 31


@dataclass(frozen=True)
class EMConfig:
    """Settings for one EM fit.

    weight_update selects the M-step gain formula:

    * 'least-squares' (default): the standard regression/EM update with
      denominator K*sum(zhat^2 + P) - (sum zhat)^2.  Guarantees a
      non-decreasing log-likelihood.
    * 'raw-moment': an alternative update whose denominator is the plain
      second-moment sum minus the unsquared mean sum,
      sum(zhat^2 + P) - sum zhat.  Kept selectable for comparison; no
      monotonicity guarantee, divergences from least-squares are logged by
      callers that request both.
    """

    max_iters: int = 50
    loglik_tol: float = 1e-4
    init_scheme: str = "pca-first-component"
    weight_update: str = "least-squares"
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.loglik_tol > 0:
            raise ValueError(f"loglik_tol must be > 0, got {self.loglik_tol}")
        if self.init_scheme not in INIT_SCHEMES:
            raise ValueError(f"init_scheme must be one of {INIT_SCHEMES}, got {self.init_scheme!r}")
        if self.weight_update not in WEIGHT_UPDATE_MODES:
            raise ValueError(
                f"weight_update must be one of {WEIGHT_UPDATE_MODES}, got {self.weight_update!r}"
            )


@dataclass(frozen=True)
class FilterResult:
    filtered: PredictionSeries
    loglik_per_step: np.ndarray

    def __post_init__(self):
        ll = np.array(self.loglik_per_step, dtype=np.float64)
        ll.flags.writeable = False
        object.__setattr__(self, "loglik_per_step", ll)

    @property
    def loglik(self) -> float:
        return math.fsum(self.loglik_per_step)


@dataclass(frozen=True)
class EMResult:
    """Outcome of em_fit.

    params holds emission and initial-state parameters expressed in
    active-space units; the state transition keeps its latent value and the
    step variance is scaled by the square of the latent-to-active gain
    (an affine change of variable adds a constant drive term that this
    parameter record does not model; it vanishes when the transition is 1).
    prediction is the smoothed latent trajectory mapped into the active
    space: level-0 decoded positions.
    """

    params: StateSpaceParams
    prediction: PredictionSeries
    loglik_trace: np.ndarray
    iters_used: int
    rescale: tuple  # (alpha, beta): active = alpha * latent + beta
    latent_params: StateSpaceParams

    def __post_init__(self):
        tr = np.array(self.loglik_trace, dtype=np.float64)
        tr.flags.writeable = False
        object.__setattr__(self, "loglik_trace", tr)
        if self.iters_used != tr.shape[0]:
            raise ValueError("loglik_trace length must equal iters_used")


def _check_dims(obs: ObservationMatrix, params: StateSpaceParams) -> None:
    if obs.M != params.M:
        raise FilterError(f"observation channels M={obs.M} do not match params M={params.M}")


def kalman_filter(obs: ObservationMatrix, params: StateSpaceParams) -> FilterResult:
    """Forward pass: filtered means/variances and the per-step predictive
    log-density of each observation row."""
    _check_dims(obs, params)
    K = obs.K
    w = params.weights
    r = params.obs_noise_var
    a = params.state_transition
    q = params.state_noise_var

    i_obs = float(np.sum(w * w / r))
    ln_det_r = float(np.sum(np.log(r)))
    E = obs.values - params.offsets
    u = E @ (w / r)
    s2 = np.einsum("km,km->k", E, E / r)

    means = np.empty(K)
    variances = np.empty(K)
    ll = np.empty(K)
    m_pred = params.init_mean
    p_pred = params.init_var
    for k in range(K):
        denom = 1.0 + p_pred * i_obs
        if denom <= 0.0 or not math.isfinite(denom):
            raise FilterError(f"innovation variance became non-positive at step {k}")
        uk = u[k]
        quad_r = s2[k] - 2.0 * m_pred * uk + m_pred * m_pred * i_obs
        wre = uk - m_pred * i_obs
        quad = quad_r - p_pred * wre * wre / denom
        ll[k] = -0.5 * (obs.M * _LN_2PI + ln_det_r + math.log(denom) + quad)
        m_new = (m_pred + p_pred * uk) / denom
        p_new = p_pred / denom
        means[k] = m_new
        variances[k] = p_new
        m_pred = a * m_new
        p_pred = a * a * p_new + q

    return FilterResult(
        filtered=PredictionSeries(level=0, positions=means, covariances=variances),
        loglik_per_step=ll,
    )


def _smooth_arrays(m_f: np.ndarray, p_f: np.ndarray, a: float, q: float):
    """RTS backward pass.  Returns smoothed means, variances, and the
    lag-one covariances cov(z_{k+1}, z_k | all data) aligned at index k."""
    K = m_f.shape[0]
    m_s = np.empty(K)
    p_s = np.empty(K)
    lag1 = np.zeros(max(K - 1, 0))
    m_s[-1] = m_f[-1]
    p_s[-1] = p_f[-1]
    for k in range(K - 2, -1, -1):
        p_pred = a * a * p_f[k] + q
        gain = 0.0 if p_pred <= 0.0 else p_f[k] * a / p_pred
        m_s[k] = m_f[k] + gain * (m_s[k + 1] - a * m_f[k])
        p_s[k] = p_f[k] + gain * gain * (p_s[k + 1] - p_pred)
        lag1[k] = gain * p_s[k + 1]
    return m_s, p_s, lag1


def kalman_smoother(filtered: PredictionSeries, params: StateSpaceParams) -> PredictionSeries:
    """Backward pass over a filter output produced under the same params.

    Smoothed variances never exceed the filtered ones: conditioning on the
    future cannot lose information.
    """
    m_s, p_s, _ = _smooth_arrays(
        filtered.positions, filtered.covariances, params.state_transition, params.state_noise_var
    )
    return PredictionSeries(level=0, positions=m_s, covariances=p_s)


def update_weights(obs: ObservationMatrix, pred: PredictionSeries, mode: str = "least-squares"):
    """M-step estimate of per-channel gain and offset from smoothed states.

    Returns (weights, offsets).  Both modes share the numerator
    K*sum(S_kj zhat_k) - sum(zhat) * sum(S_kj) and the offset formula
    (sum(S_kj) - gain_j * sum(zhat)) / K; they differ only in the gain
    denominator (see EMConfig).  A vanishing denominator raises, naming the
    sums involved.
    """
    if mode not in WEIGHT_UPDATE_MODES:
        raise ValueError(f"mode must be one of {WEIGHT_UPDATE_MODES}, got {mode!r}")
    if obs.K != pred.K:
        raise DegenerateInputError(f"length mismatch: observations K={obs.K}, predictions K={pred.K}")
    K = obs.K
    zhat = pred.positions
    zsum = float(zhat.sum())
    z2p = float(np.sum(zhat * zhat) + pred.covariances.sum())
    s_sum = obs.values.sum(axis=0)
    s_z = zhat @ obs.values

    if mode == "least-squares":
        denom = K * z2p - zsum * zsum
        label = "K*sum(zhat^2+P) - (sum zhat)^2"
    else:
        denom = z2p - zsum
        label = "sum(zhat^2+P) - sum zhat"
    if denom == 0.0:
        raise DegenerateInputError(f"weight update denominator {label} is zero")
    gain = (K * s_z - zsum * s_sum) / denom
    offsets = (s_sum - gain * zsum) / K
    return gain, offsets


def _init_params(obs: ObservationMatrix, cfg: EMConfig) -> StateSpaceParams:
    vals = obs.values
    col_mean = vals.mean(axis=0)
    col_var = np.maximum(vals.var(axis=0), _VAR_FLOOR)
    if cfg.init_scheme == "random-seeded":
        rng = np.random.default_rng([cfg.seed, _INIT_STREAM])
        w = rng.standard_normal(obs.M)
        a0, q0, mu0, var0 = 1.0, 1.0, 0.0, 1.0
    else:
        centered = vals - col_mean
        # first right singular vector = dominant emission direction
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        w = vt[0]
        scores = centered @ w
        if obs.K >= 3 and scores.std() > 0:
            s0 = scores[:-1] - scores[:-1].mean()
            s1 = scores[1:] - scores[1:].mean()
            denom = math.sqrt(float(np.sum(s0 * s0) * np.sum(s1 * s1)))
            ac = float(np.sum(s0 * s1)) / denom if denom > 0 else 0.0
        else:
            ac = 0.0
        a0 = min(max(ac, 0.0), 1.0)
        resid = scores[1:] - a0 * scores[:-1] if obs.K >= 2 else scores
        q0 = max(float(np.var(resid)), _VAR_FLOOR)
        mu0 = float(scores[0]) if obs.K else 0.0
        var0 = max(float(np.var(scores)), 1.0)
    return StateSpaceParams(
        weights=w,
        offsets=col_mean,
        obs_noise_var=col_var,
        state_transition=a0,
        state_noise_var=q0,
        init_mean=mu0,
        init_var=var0,
    )


def _m_step(obs: ObservationMatrix, m_s, p_s, lag1, params: StateSpaceParams, mode: str) -> StateSpaceParams:
    K = obs.K
    smoothed = PredictionSeries(level=0, positions=m_s, covariances=p_s)
    w, b = update_weights(obs, smoothed, mode=mode)

    # emission variance at the fresh (w, b): mean over k of
    # (S_kj - b_j - w_j zhat_k)^2 + w_j^2 P_k, expanded into column sums
    vals = obs.values
    zsum = float(m_s.sum())
    z2p = float(np.sum(m_s * m_s) + p_s.sum())
    s_sum = vals.sum(axis=0)
    s_z = m_s @ vals
    s_sq = np.einsum("km,km->m", vals, vals)
    r = (s_sq - 2.0 * b * s_sum + K * b * b - 2.0 * w * (s_z - b * zsum) + w * w * z2p) / K
    r = np.maximum(r, _VAR_FLOOR)

    if K >= 2:
        ezz = float(np.sum(m_s[1:] * m_s[:-1]) + lag1.sum())
        ez2_head = float(np.sum(m_s[:-1] ** 2) + p_s[:-1].sum())
        ez2_tail = float(np.sum(m_s[1:] ** 2) + p_s[1:].sum())
        if ez2_head <= 0.0:
            raise DegenerateInputError("transition update denominator sum E[z^2] vanished")
        a = ezz / ez2_head
        q = max((ez2_tail - 2.0 * a * ezz + a * a * ez2_head) / (K - 1), _VAR_FLOOR)
    else:
        a, q = params.state_transition, params.state_noise_var

    return StateSpaceParams(
        weights=w,
        offsets=b,
        obs_noise_var=r,
        state_transition=a,
        state_noise_var=q,
        init_mean=float(m_s[0]),
        init_var=max(float(p_s[0]), _VAR_FLOOR),
    )


def _rescale_to_space(m_s: np.ndarray, space: ActiveSpace):
    lo = float(m_s.min())
    hi = float(m_s.max())
    if hi <= lo:
        raise EMError("smoothed trajectory is constant; cannot map it onto the active space")
    alpha = space.width / (hi - lo)
    beta = space.z_min - alpha * lo
    return alpha, beta


def em_fit(obs: ObservationMatrix, space: ActiveSpace, cfg: EMConfig) -> EMResult:
    """Fit the state-space model by EM and decode level-0 positions.

    Each iteration runs one E-step (filter + smoother, with the data
    log-likelihood of the current parameters) and one M-step (gain/offset
    update in the configured mode, exact re-estimates of the emission,
    transition, and initial-state blocks).  Iteration stops when the
    log-likelihood improves by less than loglik_tol or after max_iters.
    The trace records the E-step value per iteration, so params include one
    M-step beyond the last recorded value.
    """
    params = _init_params(obs, cfg)
    trace = []
    prev_ll = -math.inf
    m_s = p_s = None
    for _ in range(cfg.max_iters):
        fres = kalman_filter(obs, params)
        ll = fres.loglik
        if not math.isfinite(ll):
            raise EMError(f"log-likelihood became non-finite at iteration {len(trace) + 1}")
        m_s, p_s, lag1 = _smooth_arrays(
            fres.filtered.positions,
            fres.filtered.covariances,
            params.state_transition,
            params.state_noise_var,
        )
        trace.append(ll)
        params = _m_step(obs, m_s, p_s, lag1, params, cfg.weight_update)
        if ll - prev_ll < cfg.loglik_tol:
            break
        prev_ll = ll

    alpha, beta = _rescale_to_space(m_s, space)
    positions = alpha * m_s + beta
    covariances = alpha * alpha * p_s
    active_params = StateSpaceParams(
        weights=params.weights / alpha,
        offsets=params.offsets - (params.weights / alpha) * beta,
        obs_noise_var=params.obs_noise_var,
        state_transition=params.state_transition,
        state_noise_var=alpha * alpha * params.state_noise_var,
        init_mean=alpha * params.init_mean + beta,
        init_var=alpha * alpha * params.init_var,
    )
    return EMResult(
        params=active_params,
        prediction=PredictionSeries(level=0, positions=positions, covariances=covariances),
        loglik_trace=np.asarray(trace),
        iters_used=len(trace),
        rescale=(alpha, beta),
        latent_params=params,
    )
