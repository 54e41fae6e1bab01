"""The scale-invariant determinant energy and its triangle approximation.

Each pair of points contributes a direction on the Riemann sphere; the
determinant of the resulting polynomial coefficient matrix has modulus 1
on collinear sets and (numerically) never drops below 1.  Minimizing
-log|D| in 3-space reproduces Thomson-like shells; in the plane the
minimizers are regular polygons until the first interior point appears at
n = 16.
"""

import numpy as np

from polyform import (AtiyahDet, Constraint, OptimizerSettings, TriangleApprox,
                      alignment_discrepancy, atiyah_determinant,
                      detect_point_group, geom_energy_fit, multi_start,
                      three_point_energy)

rng = np.random.default_rng(0)

print("|D| on special configurations:")
line = np.outer(np.linspace(-1, 1, 4), rng.normal(size=3))
print(f"  4 collinear points:    |D| = {atiyah_determinant(line).modulus:.12f}")
tri = np.array([[1, 0, 0], [-0.5, np.sqrt(3) / 2, 0], [-0.5, -np.sqrt(3) / 2, 0]])
print(f"  equilateral triangle:  |D| = {atiyah_determinant(tri).modulus:.12f}"
      f"  (9/8 = {9 / 8})")
print(f"  triangle energy check: {three_point_energy(*tri):.10f}"
      f"  = -log(9/8) = {-np.log(9 / 8):.10f}")

print()
print("3D minimizers vs the quadratic fit:")
for n in (4, 8, 12):
    run = multi_start(AtiyahDet(), n, OptimizerSettings(seed=0, start_count=20))
    label = detect_point_group(run.best).label.text
    print(f"  n={n:2d}  E={run.best_energy:9.4f}  fit={geom_energy_fit(n):9.4f}  {label}")

print()
print("Triangle-average approximation lands within 1% of the full energy's minimizer:")
for n in (6, 10):
    full = multi_start(AtiyahDet(), n, OptimizerSettings(seed=0, start_count=20))
    approx = multi_start(TriangleApprox(), n, OptimizerSettings(seed=0, start_count=20))
    disc = alignment_discrepancy(full.best.points, approx.best.points)
    print(f"  n={n:2d}  point-wise discrepancy = {100 * disc:.3f}% of diameter")

print()
print("Planar minimizers: a regular n-gon until a point jumps inside at n = 16:")
for n in (14, 15, 16, 17):
    run = multi_start(AtiyahDet(), n, OptimizerSettings(seed=0, start_count=30),
                      Constraint.PLANE)
    pts = run.best.points
    r = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
    interior = int(np.sum(r < 0.5 * r.max()))
    print(f"  n={n:2d}  ring={n - interior:2d}  interior={interior}"
          f"  {detect_point_group(run.best).label.text}")
