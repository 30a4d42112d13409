"""Born-rule sampling of projected ensembles: moments and the overlap histogram.

A scaled-down version of the staircase experiment: at x = 1 (chi = D_A/2,
d = 2) the measured moment ratios sit near the confined-wall predictions 4
and 18, approaching them from below as N_A grows; and the sampled overlap
distribution follows the discrete-mixture density rather than a rescaled
Porter-Thomas curve near u = 0.
"""

import numpy as np

from rmpslab import estimator as es
from rmpslab import theory as th

d = 2

print("staircase moment ratios at x = 1 (scaling-limit values: 4 and 18)")
for n_a in (4, 5, 6):
    chi = 2**n_a // 2
    n_b = int(np.floor(n_a**1.5))
    cfg = es.EnsembleConfig(
        setup="staircase", n_a=n_a, n_b=n_b, d=d, chi=chi, k_max=2,
        pairs_per_state=60, realizations=120, seed=99, pair_mode="pooled",
    )
    ests = es.sample_moments(cfg)
    r1, r2 = ests[0], ests[1]
    print(f"  N_A={n_a} chi={chi:3d}: ratio_1 = {r1.ratio_to_haar:6.3f} ± {r1.ratio_stderr:.3f}"
          f"   ratio_2 = {r2.ratio_to_haar:6.2f} ± {r2.ratio_stderr:.2f}")
print("  (finite-size deficits shrink roughly 2x per added site)")

print()
print("overlap histogram vs the closed-form density at x = 1, N_A = 6")
cfg = es.EnsembleConfig(
    setup="staircase", n_a=6, n_b=14, d=d, chi=32, k_max=1,
    pairs_per_state=3000, realizations=20, seed=5,
)
tab = es.overlap_histogram(cfg, bins=16, u_max=8.0)
mean_u = th.setup1_ratio(1, 1.0, d)
print(f"  {'u':>5} {'sampled':>9} {'predicted':>10} {'rescaled PT':>12}")
for c, dens, err in zip(tab.bin_centers, tab.density, tab.error):
    pred = th.setup1_pdf(float(c), 1.0, d)
    pt = np.exp(-c / mean_u) / mean_u
    print(f"  {c:5.2f} {dens:9.4f} {pred:10.4f} {pt:12.4f}")
print("  the prediction captures the u -> 0 weight; a rescaled Porter-Thomas")
print("  distribution (same mean) undershoots it.")
