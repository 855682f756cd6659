"""PDF mode counts and PSD power across correction levels.

Cell-centered prediction error makes the corrected series' density split
into one Gaussian-like bump per cell, so the counted modes track 2^N for
shallow levels. The PSD shows how much broadband noise power correction
removes relative to the truth series.
"""

import symdecode as sd

space = sd.ActiveSpace(0.0, 200.0)
ds = sd.make_dataset(sd.SimConfig(seed=5, K=20000, M=4, space=space))
truth = ds.traj_x

for depth in (1, 2, 3):
    preds = sd.cell_center_predictions(truth, space, depth, noise_frac=0.125, seed=5)
    trace = sd.correct_recursive(preds, truth, space, N=depth)
    pdf = sd.estimate_pdf(trace.final().positions, bins=50, range_=(space.z_min, space.z_max))
    print(f"level {depth}: {sd.count_modes(pdf):>2} density modes (cells: {2 ** depth})")

truth_psd = sd.estimate_psd(truth.positions)
preds = sd.gaussian_error_predictions(truth, space, noise_std=12.0, seed=5)
trace = sd.correct_recursive(preds, truth, space, N=5)

print()
print(f"{'series':>10} {'total PSD power':>16}")
print(f"{'truth':>10} {truth_psd.powers.sum():>16.1f}")
for n in (0, 3, 5):
    psd = sd.estimate_psd(trace.levels[n].positions)
    print(f"{f'level {n}':>10} {psd.powers.sum():>16.1f}")

screen = sd.gaussian_moment_screen(sd.noise_series(trace.levels[0], truth))
print()
print(f"level-0 residual screen: skew {screen.skew:+.3f}, "
      f"excess kurtosis {screen.excess_kurtosis:+.3f}, passed={screen.passed}")
