"""Unconstrained particles held together by a harmonic pull to the origin.

Coulomb repulsion gives the plum-pudding (one-component plasma) shells;
linear pairwise attraction gives the monopole-scattering configurations,
which hug a single sphere whose radius grows like 2n/3.
"""

import numpy as np

from polyform import (CentralCoulomb, MonopoleLinear, OptimizerSettings,
                      central_lower_bound, detect_point_group,
                      monopole_estimates, multi_start, shell_decomposition)

print("Central (plum pudding) configurations:")
for n in (2, 4, 8, 12, 13, 14, 20):
    run = multi_start(CentralCoulomb(), n, OptimizerSettings(seed=0, start_count=40))
    sd = shell_decomposition(run.best)
    label = detect_point_group(run.best).label.text
    print(f"  n={n:2d}  E={run.best_energy:10.5f}  bound={central_lower_bound(n):9.5f}"
          f"  shells={sd.sizes}  {label}")
print("  (n=13 is the first 2-shell case: icosahedron around a single center)")

print()
print("Monopole-scattering energy: points on a growing sphere:")
for n in (4, 8, 12, 16):
    run = multi_start(MonopoleLinear(), n, OptimizerSettings(seed=0, start_count=30))
    radii = np.linalg.norm(run.best.points - run.best.points.mean(axis=0), axis=1)
    r_est, e_est = monopole_estimates(n)
    print(f"  n={n:2d}  mean radius {radii.mean():8.4f} (estimate {r_est:8.4f})"
          f"  E={run.best_energy:11.4f} (estimate {e_est:11.4f})")
