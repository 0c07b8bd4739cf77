"""Sweep the energy-window radius and print the ablation table.

Each row retrains the toy model with weights from a different window
radius; the last row is the unweighted baseline. Which radius wins is a
property of the data, so the script reports it instead of assuming it.
"""

import numpy as np

from visemekit import (
    TrainConfig,
    VertexRegionMask,
    ablate_window,
    demo_spec,
    format_csv_report,
    gen_viseme_track,
)

track, annotation = gen_viseme_track(demo_spec(seed=3))
lips = VertexRegionMask(np.arange(20), region_name="lips")
cfg = TrainConfig(learning_rate=0.2, steps=1200, seed=3, num_basis=30)

result = ablate_window(track, cfg, sigmas=[0, 1, 2, 3, 4, 5], annotation=annotation, lips=lips)
print(format_csv_report(result), end="")

best = result.best_sigma
print(f"best sigma = {best}, window size {2 * best + 1}")
baseline = result.baseline
for row in result.weighted_rows:
    verdict = "beats" if row.lve_transition < baseline.lve_transition else "loses to"
    print(f"sigma {row.sigma} {verdict} the baseline on transition lip error")
