"""Lennard-Jones microclusters and Mackay icosahedra.

Complete Mackay icosahedra (13, 55, 147, ... atoms) are the magic-number
clusters; off-magic sizes partially fill the outer shell, so n = 12 keeps
only C_5v symmetry instead of full icosahedral.
"""

import numpy as np

from polyform import (Configuration, LennardJones, OptimizerSettings,
                      detect_point_group, energy, mackay_icosahedron,
                      minima_census, multi_start, platonic, shell_decomposition)

print("Mackay shell counts (10 s^2 + 2 per shell):")
for s in range(4):
    print(f"  {s} shells -> {len(mackay_icosahedron(s))} sites")

print()
print("Cluster minima:")
for n in (12, 13, 14, 55):
    run = multi_start(LennardJones(), n, OptimizerSettings(seed=0, start_count=30))
    sd = shell_decomposition(run.best)
    label = detect_point_group(run.best).label.text
    print(f"  n={n:2d}  E={run.best_energy:12.6f}  shells={sd.sizes}  {label}")

print()
print("n=12: removing an outer vertex beats the perfect icosahedral ring:")
run12 = multi_start(LennardJones(), 12, OptimizerSettings(seed=0, start_count=40))
ico = platonic("icosahedron").points
scales = np.linspace(0.8, 1.6, 401)
ring_best = min(energy(LennardJones(), Configuration(s * ico)) for s in scales)
print(f"  vertex-removed cluster: {run12.best_energy:.6f}")
print(f"  icosahedral 12-ring:    {ring_best:.6f}")

print()
print("How rugged is the n=13 landscape? (local minima found per start budget)")
for starts in (100, 500):
    census = minima_census(LennardJones(), 13,
                           OptimizerSettings(seed=1, start_count=starts))
    distinct = census.distinct_minima(converged_only=True)
    print(f"  {starts:5d} starts -> {len(distinct):4d} distinct minima"
          f"  (best E = {census.best_energy:.6f})")
