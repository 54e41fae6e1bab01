"""Tammes packings and the sum-of-separations problem.

The p -> infinity limit of the Riesz family is the packing problem; the
p = -1 end (maximizing the sum of distances) usually shares the Thomson
combinatorics, except at n = 7 and n = 29.
"""

import numpy as np

from polyform import (OptimizerSettings, RieszSphere, SumSeparation,
                      detect_point_group, min_pair_distance, multi_start,
                      tammes_solve, toth_lower_bound)

print("Tammes packings (best min distance found):")
for n, exact in [(2, 2.0), (3, np.sqrt(3)), (4, np.sqrt(8 / 3)),
                 (6, np.sqrt(2)), (12, 4 / np.sqrt(10 + 2 * np.sqrt(5)))]:
    run = tammes_solve(n, OptimizerSettings(seed=0, start_count=15))
    print(f"  n={n:2d}  d_min={-run.best_energy:.8f}  known optimum {exact:.8f}")

print()
print("Fejes Toth vs Thomson at n = 7 (labels diverge):")
thomson = multi_start(RieszSphere(1.0), 7, OptimizerSettings(seed=0, start_count=70))
sumsep = multi_start(SumSeparation(), 7, OptimizerSettings(seed=0, start_count=70))
print(f"  Thomson minimizer: {detect_point_group(thomson.best).label.text}"
      f"  (E = {thomson.best_energy:.6f})")
print(f"  max-sum minimizer: {detect_point_group(sumsep.best).label.text}"
      f"  (E = {sumsep.best_energy:.6f})")

print()
print("Sum-of-separations minima vs the closed-form lower bound:")
for n in (2, 4, 8, 16, 24):
    run = multi_start(SumSeparation(), n, OptimizerSettings(seed=0, start_count=20))
    print(f"  n={n:2d}  E={run.best_energy:12.4f}  bound={toth_lower_bound(n):12.4f}"
          f"  margin={run.best_energy - toth_lower_bound(n):8.4f}")
