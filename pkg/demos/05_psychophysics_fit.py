# # From trial logs to a fitted tolerance
#
# A synthetic experiment with the reference design: 14 subjects, 9 widths,
# 10 images per width shown 3 times each. We clean it, aggregate it and
# fit the Gaussian model's tolerance to the population curve.

import numpy as np

from pareidolia.gaussian_model import GaussianModelConfig
from pareidolia.psycho import Design, aggregate_curve, clean_trials, compare_groups, fit_gaussian_model, rt_curve, synth_trials

trials = synth_trials(Design(), seed=42)
kept, dropped = clean_trials(trials)
print(f"{len(trials)} trials, {len(dropped)} dropped "
      f"({sum(r == 'too-fast' for _, r in dropped)} too fast, {sum(r == 'break' for _, r in dropped)} breaks)")

curve = aggregate_curve(kept)
rts = rt_curve(kept)
for w, y, ci, rt in zip(curve.x, curve.y, curve.ci, rts.y):
    print(f"width {w:>5g}: {y:4.2f} +/- {ci:.2f} faces, mean RT {rt:5.0f} ms")

groups = compare_groups(kept, "group")
worst = max(groups.differences, key=lambda d: d[3] / d[4])
print(f"largest group gap: {worst[3]:.2f} faces at width {worst[0]:g} (pooled sd {worst[4]:.2f})")

# The fit couples face counts to model density through one scale factor.

fit = fit_gaussian_model(curve, np.arange(1.0, 21.0), GaussianModelConfig())
print(f"gamma_hat {fit.gamma_hat:g}, rss {fit.rss:.3f}")
