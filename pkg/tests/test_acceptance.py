"""Go/no-go acceptance gates.

Each test is one behavioral criterion with pinned tolerances and runtime
budgets, and prints exactly one [PASS]/[FAIL] verdict line.  These are the
non-negotiable contracts of the package; module tests elsewhere cover the
finer-grained behavior.
"""

import math
import time

import numpy as np
import pytest

import symdecode as sd

from _oracles import (
    filter_moments,
    js_direct,
    kl_direct,
    manual_smoothed_pmf,
    random_params,
    smoother_moments,
)

SPACE = sd.ActiveSpace(0.0, 200.0)


def _verdict(name: str, ok: bool, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    line = f"[{tag}] {name}"
    if detail:
        line += f": {detail}"
    print(line)
    assert ok, line


def test_error_bound_law():
    # 10^4 seeded uniform (prediction, truth) pairs; for every depth N in
    # 1..8 the corrected error never exceeds 200 / 2^N.  Budget: 5 s.
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    K = 10_000
    truth = sd.TrajectorySeries(axis="x", positions=rng.uniform(0.0, 200.0, K))
    pred = sd.PredictionSeries(
        level=0, positions=rng.uniform(0.0, 200.0, K), covariances=np.zeros(K)
    )
    violations = 0
    worst = []
    for N in range(1, 9):
        trace = sd.correct_recursive(pred, truth, SPACE, N)
        err = np.abs(trace.final().positions - truth.positions)
        bound = 200.0 / 2**N
        violations += int((err > bound).sum())
        worst.append(float(err.max()))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 5.0
    _verdict(
        "error-bound law |err_N| <= 200/2^N for N=1..8",
        ok,
        f"violations={violations}, worst_at_N8={worst[-1]:.6g} (bound {200/256:.6g}), {elapsed:.2f}s",
    )


def test_metric_trend_on_synthetic_session():
    # Full unsupervised run at K=2e4, M=46: r2/pcc must not decrease and
    # rmse/kl/js must not increase from level 1 on, with r2 and pcc >= 0.99
    # at level 5.  Budget: 60 s.
    t0 = time.perf_counter()
    cfg = sd.SimConfig(seed=1, K=20_000, M=46, space=SPACE, step_std=5.0, obs_noise_std=1500.0)
    ds = sd.make_dataset(cfg)
    em = sd.em_fit(ds.obs, SPACE, sd.EMConfig(max_iters=60, loglik_tol=1e-3, seed=1))
    trace = sd.correct_recursive(em.prediction, ds.traj_x, SPACE, 5)
    rows = sd.metric_table(trace, ds.traj_x, sd.HistogramSpec(range=(0.0, 200.0)))
    elapsed = time.perf_counter() - t0

    bad = []
    for a, b in zip(rows[1:], rows[2:]):  # transitions 1->2 .. 4->5
        if b.r2 < a.r2 or b.pcc < a.pcc:
            bad.append(f"quality dropped {a.N}->{b.N}")
        if b.rmse > a.rmse or b.kl_score > a.kl_score or b.js_score > a.js_score:
            bad.append(f"error rose {a.N}->{b.N}")
    final = rows[5]
    if final.r2 < 0.99:
        bad.append(f"r2@5={final.r2:.4f}")
    if final.pcc < 0.99:
        bad.append(f"pcc@5={final.pcc:.4f}")
    if elapsed >= 60.0:
        bad.append(f"{elapsed:.1f}s over budget")
    _verdict(
        "metric trend over levels 0..5 on the K=2e4, M=46 session",
        not bad,
        "; ".join(bad) or f"r2@5={final.r2:.4f} pcc@5={final.pcc:.4f} rmse@5={final.rmse:.3f}, {elapsed:.1f}s",
    )


def test_robustness_radius_column():
    got = [sd.r_max(200.0, n) for n in range(6)]
    want = [200.0, 100.0, 50.0, 25.0, 12.5, 6.25]
    _verdict("robustness radius column 200/2^N, N=0..5", got == want, f"got {got}")


def test_filter_smoother_against_dense_conditioning():
    # 100 random models with K <= 5 against brute-force joint-Gaussian
    # conditioning, means and variances to 1e-8.
    worst = 0.0
    for case in range(100):
        rng = np.random.default_rng([case, 909])
        K = int(rng.integers(1, 6))
        M = int(rng.integers(1, 5))
        params = random_params(rng, M)
        obs = sd.ObservationMatrix(rng.normal(0.0, 3.0, (K, M)))
        filt = sd.kalman_filter(obs, params)
        o_mean, o_var = filter_moments(params, obs.values)
        worst = max(
            worst,
            float(np.max(np.abs(filt.filtered.positions - o_mean))),
            float(np.max(np.abs(filt.filtered.covariances - o_var))),
        )
        smo = sd.kalman_smoother(filt.filtered, params)
        s_mean, s_var = smoother_moments(params, obs.values)
        worst = max(
            worst,
            float(np.max(np.abs(smo.positions - s_mean))),
            float(np.max(np.abs(smo.covariances - s_var))),
        )
    _verdict(
        "filter/smoother vs dense joint-Gaussian conditioning (100 cases)",
        worst <= 1e-8,
        f"worst deviation {worst:.3g} (tol 1e-8)",
    )


def test_em_monotonicity_and_weight_recovery():
    # (a) log-likelihood never drops by more than 1e-8 across 50 seeded fits
    # in least-squares mode; (b) at K=1e4 the emission weights are recovered
    # up to a global sign within 5% relative error.
    worst_dip = 0.0
    for seed in range(50):
        cfg = sd.SimConfig(seed=seed, K=300, M=6, space=SPACE, step_std=5.0)
        ds = sd.make_dataset(cfg)
        res = sd.em_fit(
            ds.obs,
            SPACE,
            sd.EMConfig(max_iters=12, loglik_tol=1e-9, weight_update="least-squares", seed=seed),
        )
        if len(res.loglik_trace) > 1:
            worst_dip = min(worst_dip, float(np.min(np.diff(res.loglik_trace))))

    cfg = sd.SimConfig(seed=11, K=10_000, M=20, space=SPACE, step_std=5.0, obs_noise_std=5.0)
    traj = sd.generate_trajectory(cfg)
    params = sd.true_params(cfg)
    obs = sd.generate_observations(traj, params, seed=11)
    em = sd.em_fit(obs, SPACE, sd.EMConfig(max_iters=60, loglik_tol=1e-3, seed=11))
    rel = [
        float(np.max(np.abs(s * em.params.weights - params.weights) / np.abs(params.weights)))
        for s in (1.0, -1.0)
    ]
    recovery = min(rel)

    ok = worst_dip >= -1e-8 and recovery <= 0.05
    _verdict(
        "EM monotone over 50 fits and weights recovered up to sign at K=1e4",
        ok,
        f"worst loglik dip {worst_dip:.3g} (tol -1e-8), weight error {recovery:.4f} (tol 0.05)",
    )


def test_divergence_oracle_and_bounds():
    # 1000 random histogram pairs: kl/js match the direct-summation oracle to
    # 1e-10, js is bitwise symmetric, and js never exceeds ln 2 + 1e-12.
    spec = sd.HistogramSpec(bin_count=50, range=(0.0, 200.0), smoothing_epsilon=1e-6)
    rng = np.random.default_rng(77)
    ln2 = math.log(2.0)
    worst_gap = 0.0
    worst_js = 0.0
    asym = 0
    for _ in range(1000):
        a = rng.normal(rng.uniform(20, 180), rng.uniform(3, 70), 300)
        b = rng.normal(rng.uniform(20, 180), rng.uniform(3, 70), 300)
        kl = sd.kl_score(a, b, spec)
        js = sd.js_score(a, b, spec)
        p = manual_smoothed_pmf(a, 50, 0.0, 200.0, 1e-6)
        q = manual_smoothed_pmf(b, 50, 0.0, 200.0, 1e-6)
        worst_gap = max(worst_gap, abs(kl - kl_direct(p, q)), abs(js - js_direct(p, q)))
        worst_js = max(worst_js, js)
        asym += int(js != sd.js_score(b, a, spec))
    ok = worst_gap <= 1e-10 and asym == 0 and worst_js <= ln2 + 1e-12
    _verdict(
        "KL/JS vs direct-summation oracle, symmetry, ln2 bound (1000 pairs)",
        ok,
        f"worst oracle gap {worst_gap:.3g} (tol 1e-10), asymmetric {asym}, max js {worst_js:.6f} <= ln2",
    )


def test_board_convergence():
    # rows=12, balls=1e5, p=0.5: TV to the exact binomial under 0.02; the
    # normal-approximation KL strictly decreases over rows 4 -> 16 -> 64.
    # Budget: 5 s.
    t0 = time.perf_counter()
    board = sd.simulate_board(sd.BoardConfig(rows=12, balls=100_000, right_prob=0.5, seed=1))
    tv = sd.tv_distance(board.empirical_pmf, sd.binomial_pmf(12, 0.5))
    clt = sd.clt_convergence_report(64, 0.5)
    elapsed = time.perf_counter() - t0
    rows = [r for r, _ in clt]
    kls = [k for _, k in clt]
    decreasing = all(kls[i] > kls[i + 1] for i in range(len(kls) - 1))
    ok = tv < 0.02 and rows == [4, 16, 64] and decreasing and elapsed < 5.0
    _verdict(
        "board TV < 0.02 at rows=12/balls=1e5 and KL to normal strictly decreasing",
        ok,
        f"tv={tv:.4f}, kl={['%.4g' % k for k in kls]}, {elapsed:.2f}s",
    )


def test_residual_gaussianity_screen():
    # Gaussian level-0 error stays Gaussian under correction: at K=2e4,
    # every level 0..5 passes |skew| < 0.2 and |excess kurtosis| < 0.5.
    worst_skew = worst_kurt = 0.0
    for seed in (1, 2, 3):
        cfg = sd.SimConfig(seed=seed, K=20_000, M=4, space=SPACE, step_std=5.0)
        truth = sd.generate_trajectory(cfg)
        pred = sd.gaussian_error_predictions(truth, SPACE, noise_std=1.0, seed=seed)
        trace = sd.correct_recursive(pred, truth, SPACE, 5)
        for lvl in trace.levels:
            screen = sd.gaussian_moment_screen(lvl.positions - truth.positions)
            worst_skew = max(worst_skew, abs(screen.skew))
            worst_kurt = max(worst_kurt, abs(screen.excess_kurtosis))
    ok = worst_skew < 0.2 and worst_kurt < 0.5
    _verdict(
        "residuals stay moment-Gaussian at every level 0..5 (K=2e4)",
        ok,
        f"worst |skew|={worst_skew:.4f} (<0.2), worst |ex-kurt|={worst_kurt:.4f} (<0.5)",
    )


def test_mode_count_reaches_cell_count():
    # Per-cell Gaussian prediction error yields between 1 and 2^N density
    # modes at level N, and over seeds 1..5 the count reaches exactly 2^N
    # for N in {1, 2}.
    seeds = (1, 2, 3, 4, 5)
    in_range = True
    max_counts = {}
    for N in (1, 2, 3, 4, 5):
        counts = []
        for seed in seeds:
            cfg = sd.SimConfig(seed=seed, K=20_000, M=4, space=SPACE, step_std=5.0)
            truth = sd.generate_trajectory(cfg)
            pred = sd.cell_center_predictions(truth, SPACE, N, noise_frac=0.125, seed=seed)
            trace = sd.correct_recursive(pred, truth, SPACE, N)
            pdf = sd.estimate_pdf(trace.final().positions, bins=50, range_=(0.0, 200.0))
            counts.append(sd.count_modes(pdf))
        in_range &= all(1 <= c <= 2**N for c in counts)
        max_counts[N] = max(counts)
    ok = in_range and max_counts[1] == 2 and max_counts[2] == 4
    _verdict(
        "mode count in [1, 2^N] with max over seeds = 2^N at N in {1,2}",
        ok,
        f"max counts per level {max_counts}",
    )


def test_report_determinism(tmp_path):
    # Identical config + seed must serialize to byte-identical reports.
    def cfg(out):
        return sd.PipelineConfig(
            source="synthetic",
            sim=sd.SimConfig(seed=42, K=2000, M=8, space=SPACE, step_std=5.0, obs_noise_std=60.0),
            em=sd.EMConfig(max_iters=10, loglik_tol=1e-3, seed=42),
            n_max=3,
            galton=sd.BoardConfig(rows=8, balls=20_000, right_prob=0.5, seed=42),
            clt_max_rows=16,
            out_dir=out,
            emit_plots=False,
        )

    sd.run_pipeline(cfg(tmp_path / "a"))
    sd.run_pipeline(cfg(tmp_path / "b"))
    b1 = (tmp_path / "a" / "report.json").read_bytes()
    b2 = (tmp_path / "b" / "report.json").read_bytes()
    _verdict(
        "byte-identical report.json across two identically-seeded runs",
        b1 == b2,
        f"{len(b1)} bytes each" if b1 == b2 else "reports differ",
    )
