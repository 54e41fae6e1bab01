"""Closed-form bounds, fit formulas and structural validation.

The bound functions are pure formula evaluators; pairing them with
measured minima happens in the caller (CLI or tests), so a bound check
never depends on optimizer internals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .geometry import Polyhedron, combinatorial_signature, dual
from .symmetry import canonical_pose


def toth_lower_bound(n: int) -> float:
    """Lower bound 1/2 - (2/3) n^2 on the negated sum of separations."""
    if n < 2:
        raise ValueError("need n >= 2")
    return 0.5 - (2.0 / 3.0) * n * n


def central_lower_bound(n: int) -> float:
    """Packing bound 0.9 n (n^(2/3) - 1) on the central-configuration energy."""
    if n < 1:
        raise ValueError("need n >= 1")
    return 0.9 * n * (n ** (2.0 / 3.0) - 1.0)


def monopole_estimates(n: int) -> tuple:
    """(radius, energy) estimates for the linear-attraction minimizers:
    r = 2n/3 - 1/(2n) and E = -(2/9) n^3 + n/3 - 1/8."""
    if n < 2:
        raise ValueError("need n >= 2")
    radius = 2.0 * n / 3.0 - 1.0 / (2.0 * n)
    energy = -(2.0 / 9.0) * n ** 3 + n / 3.0 - 0.125
    return radius, energy


GEOM_FIT_A = 0.143
GEOM_FIT_B = 0.792


def geom_energy_fit(n: int) -> float:
    """Quadratic fit -a n^2 + b n + 4a - 2b to the determinant energy minimum."""
    if n < 2:
        raise ValueError("need n >= 2")
    a, b = GEOM_FIT_A, GEOM_FIT_B
    return -a * n * n + b * n + 4.0 * a - 2.0 * b


@dataclass(frozen=True)
class BoundReport:
    """One bound-versus-measurement row."""

    name: str
    n: int
    bound: float
    measured: float
    satisfied: bool
    relative_gap: float

    def to_dict(self) -> dict:
        return {"name": self.name, "n": self.n, "bound": self.bound,
                "measured": self.measured, "satisfied": self.satisfied,
                "relative_gap": self.relative_gap}


def bound_report(name: str, n: int, bound: float, measured: float) -> BoundReport:
    """Report for a lower bound: satisfied iff measured >= bound."""
    gap = (measured - bound) / max(abs(bound), 1e-300)
    return BoundReport(name=name, n=n, bound=bound, measured=measured,
                       satisfied=measured >= bound, relative_gap=gap)


@dataclass(frozen=True)
class FullereneReport:
    is_trivalent: bool
    pentagons: int
    hexagons: int
    others: int
    num_vertices: int
    num_faces: int
    num_edges: int
    identities_hold: bool

    @property
    def valid(self) -> bool:
        return self.is_trivalent and self.identities_hold

    def to_dict(self) -> dict:
        return {"is_trivalent": self.is_trivalent, "pentagons": self.pentagons,
                "hexagons": self.hexagons, "others": self.others,
                "V": self.num_vertices, "F": self.num_faces, "E": self.num_edges,
                "identities_hold": self.identities_hold, "valid": self.valid}


def validate_fullerene(poly: Polyhedron) -> FullereneReport:
    """Check the trivalent 12-pentagon structure and its V, E identities."""
    census = poly.face_sizes()
    pent = census.get(5, 0)
    hexa = census.get(6, 0)
    other = sum(c for size, c in census.items() if size not in (5, 6))
    trivalent = bool(np.all(poly.vertex_degrees() == 3))
    v, f, e = poly.num_vertices, poly.num_faces, poly.num_edges
    identities = (pent == 12 and other == 0 and v == 2 * f - 4 and e == 3 * f - 6)
    return FullereneReport(is_trivalent=trivalent, pentagons=pent, hexagons=hexa,
                           others=other, num_vertices=v, num_faces=f, num_edges=e,
                           identities_hold=identities)


def deltahedron_census(poly: Polyhedron) -> tuple:
    """(is_deltahedron, pentamer count, hexamer count, other-degree count)."""
    is_delta = all(len(f) == 3 for f in poly.faces)
    degrees = poly.vertex_degrees()
    pent = int(np.sum(degrees == 5))
    hexa = int(np.sum(degrees == 6))
    other = int(len(degrees) - pent - hexa)
    return is_delta, pent, hexa, other


def compare_combinatorics(a: Polyhedron, b: Polyhedron, dualize_b: bool = False) -> bool:
    """True iff the polyhedra share a combinatorial type (optionally dualizing b)."""
    if dualize_b:
        b = dual(b)
    return combinatorial_signature(a) == combinatorial_signature(b)


def _normalize(points):
    x = canonical_pose(points)
    rms = np.sqrt(np.mean(np.sum(x * x, axis=1)))
    return x / rms if rms > 0 else x


def _alternate_alignment(a, b, rounds):
    """Alternate Hungarian matching and orthogonal Procrustes; final max gap."""
    _rows, perm = linear_sum_assignment(cdist(a, b) ** 2)
    prev = None
    for _ in range(rounds):
        u, _s, vt = np.linalg.svd(b[perm].T @ a)
        b_rot = b @ (u @ vt)
        _rows, cols = linear_sum_assignment(cdist(a, b_rot) ** 2)
        perm = cols
        if prev is not None and np.array_equal(cols, prev):
            break
        prev = cols
    u, _s, vt = np.linalg.svd(b[perm].T @ a)
    b_final = (b @ (u @ vt))[perm]
    return float(np.linalg.norm(a - b_final, axis=1).max())


def alignment_discrepancy(a_points, b_points, rounds: int = 20) -> float:
    """Largest per-point distance between two configurations, relative to the
    first one's diameter, after centering, RMS scaling, optimal orthogonal
    rotation (Procrustes) and optimal point matching (Hungarian).

    Both inputs start in their canonical principal-axis pose; the pose's
    per-axis sign ambiguity is resolved by trying all eight sign flips and
    keeping the best alignment.
    """
    a = _normalize(a_points)
    b = _normalize(b_points)
    if len(a) != len(b):
        raise ValueError("configurations must have the same size")
    best = np.inf
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            for sz in (1.0, -1.0):
                gap = _alternate_alignment(a, b * np.array([sx, sy, sz]), rounds)
                best = min(best, gap)
    diam = cdist(a, a).max()
    return best / diam
