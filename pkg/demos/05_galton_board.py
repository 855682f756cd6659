"""Galton board: simulated bin counts against the exact binomial law.

Also prints the CLT convergence report (KL to a moment-matched normal,
shrinking as rows grow) and the board-style view of an actual correction
run, where each level's residual histogram plays the role of a peg row.
"""

import symdecode as sd

cfg = sd.BoardConfig(rows=12, balls=50_000, right_prob=0.5, seed=9)
result = sd.simulate_board(cfg)
exact = sd.binomial_pmf(cfg.rows, cfg.right_prob)

print("bin  simulated  exact")
for i, (sim, ref) in enumerate(zip(result.empirical_pmf, exact)):
    bar = "#" * round(120 * ref)
    print(f"{i:>3}  {sim:>9.4f}  {ref:>6.4f} {bar}")
print(f"\nTV distance to exact: {sd.tv_distance(result.empirical_pmf, exact):.5f}")

print("\nrows  KL(binomial || normal)")
for rows, kl in sd.clt_convergence_report(max_rows=64, p=0.5):
    print(f"{rows:>4}  {kl:.3e}")

space = sd.ActiveSpace(0.0, 200.0)
ds = sd.make_dataset(sd.SimConfig(seed=2, K=10000, M=4, space=space))
preds = sd.gaussian_error_predictions(ds.traj_x, space, noise_std=10.0, seed=2)
trace = sd.correct_recursive(preds, ds.traj_x, space, N=4)
report = sd.algorithm_board_report(trace, ds.traj_x)

print("\nlevel  residual modes  residual std  ones fraction")
for lvl, ones in zip(report.levels, [None] + list(report.bit_ones_fraction)):
    ones_txt = "     " if ones is None else f"{ones:.3f}"
    print(f"{lvl.level:>5}  {lvl.mode_count:>14}  {lvl.residual_std:>12.3f}  {ones_txt}")
