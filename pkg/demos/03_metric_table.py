"""End-to-end decode + correction, printing the per-level metric table."""

import symdecode as sd

space = sd.ActiveSpace(0.0, 200.0)
ds = sd.make_dataset(sd.SimConfig(seed=3, K=8000, M=24, space=space, obs_noise_std=60.0))

fit = sd.em_fit(ds.obs, space, sd.EMConfig(max_iters=40, seed=3))
trace = sd.correct_recursive(fit.prediction, ds.traj_x, space, N=5)
rows = sd.metric_table(trace, ds.traj_x, sd.HistogramSpec())

header = " ".join(f"{c:>9}" for c in sd.METRIC_COLUMNS)
print(header)
for row in rows:
    cells = []
    for value in row.as_tuple():
        if value is None:
            cells.append(f"{'--':>9}")
        elif isinstance(value, int):
            cells.append(f"{value:>9}")
        else:
            cells.append(f"{value:>9.4f}")
    print(" ".join(cells))

print()
print("corrections clamped out-of-space inputs", trace.log.clamps, "times")
