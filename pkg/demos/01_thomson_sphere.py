"""Electrons on a sphere: minimal Coulomb energy configurations.

Reproduces the small-n story: antipodal pair, great-circle triangle, the
Platonic minimizers at n = 4, 6, 12, and the square antiprism that beats
the cube at n = 8.  Raise START_BUDGET (or use the CLI) for larger n.
"""

import numpy as np
from scipy.spatial.distance import pdist

from polyform import (OptimizerSettings, RieszSphere, convex_hull, energy,
                      detect_point_group, multi_start, platonic)

START_BUDGET = 30

for n in range(2, 13):
    run = multi_start(RieszSphere(1.0), n, OptimizerSettings(seed=0, start_count=START_BUDGET))
    label = detect_point_group(run.best).label.text
    try:
        hull = convex_hull(run.best)
        counts = f"V={hull.num_vertices} F={hull.num_faces} E={hull.num_edges}"
    except Exception:
        counts = "degenerate hull (n < 4)"
    print(f"n={n:2d}  E={run.best_energy:12.6f}  {label:6s}  {counts}")

print()
print("n=8: the most symmetric arrangement is not the best one.")
run8 = multi_start(RieszSphere(1.0), 8, OptimizerSettings(seed=0, start_count=80))
cube = platonic("cube")
print(f"  square antiprism: {run8.best_energy:.6f}")
print(f"  perfect cube:     {energy(RieszSphere(1.0), cube):.6f}")

print()
print("n=4 pairwise distances (regular tetrahedron has all sqrt(8/3)):")
run4 = multi_start(RieszSphere(1.0), 4, OptimizerSettings(seed=0, start_count=20))
print(" ", np.round(np.sort(pdist(run4.best.points)), 6))
print("  sqrt(8/3) =", round(np.sqrt(8 / 3), 6))
