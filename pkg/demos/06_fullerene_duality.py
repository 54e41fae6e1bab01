"""Deltahedra, trivalent duals and fullerene polyhedra.

Minimal-energy point sets on the sphere are generically deltahedra with
12 five-fold vertices; their duals are trivalent polyhedra with exactly
12 pentagons, the fullerene cages of carbon chemistry.
"""

from polyform import (OptimizerSettings, RieszSphere, convex_hull,
                      deltahedron_census, dual, multi_start, platonic,
                      truncated_icosahedron, validate_fullerene)

print("The C60 buckyball cage (truncated icosahedron):")
bucky = truncated_icosahedron()
report = validate_fullerene(bucky)
print(f"  V={report.num_vertices} F={report.num_faces} E={report.num_edges}"
      f"  pentagons={report.pentagons} hexagons={report.hexagons}"
      f"  valid fullerene: {report.valid}")

print()
print("The dodecahedron is the smallest fullerene:")
dodeca = convex_hull(platonic("dodecahedron"))
print(f"  {validate_fullerene(dodeca).to_dict()}")

print()
print("Thomson minimizers are (generically) deltahedra; their duals are fullerenes:")
for n in (24, 32):
    run = multi_start(RieszSphere(1.0), n, OptimizerSettings(seed=0, start_count=120))
    hull = convex_hull(run.best)
    is_delta, pentamers, hexamers, others = deltahedron_census(hull)
    print(f"  n={n}: deltahedron={is_delta}  pentamers={pentamers} hexamers={hexamers}")
    if is_delta:
        rep = validate_fullerene(dual(hull))
        print(f"        dual: F={rep.num_faces} pentagons={rep.pentagons}"
              f" hexagons={rep.hexagons} valid={rep.valid}")

print()
print("OFF export of the buckyball (first 3 lines):")
print("\n".join(bucky.to_off().splitlines()[:3]))
