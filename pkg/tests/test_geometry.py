"""Tests for configurations, hulls, duality, signatures and generators."""

import numpy as np
import pytest
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation

from polyform import geometry as geo
from polyform.errors import DegenerateHull, DuplicatePoints

TABLE_COUNTS = {
    "tetrahedron": (4, 4, 6),
    "octahedron": (6, 8, 12),
    "cube": (8, 6, 12),
    "icosahedron": (12, 20, 30),
    "dodecahedron": (20, 12, 30),
}


@pytest.mark.parametrize("kind", sorted(TABLE_COUNTS))
def test_platonic_hull_counts(kind):
    poly = geo.convex_hull(geo.platonic(kind))
    v, f, e = TABLE_COUNTS[kind]
    assert (poly.num_vertices, poly.num_faces, poly.num_edges) == (v, f, e)
    assert geo.check_euler(poly)


def test_platonic_points_on_sphere():
    for kind in TABLE_COUNTS:
        cfg = geo.platonic(kind)
        radii = np.linalg.norm(cfg.points, axis=1)
        assert np.abs(radii - 1.0).max() <= 1e-12
        assert np.abs(cfg.points.mean(axis=0)).max() < 1e-12


def test_tetrahedron_distances():
    d = pdist(geo.platonic("tetrahedron").points)
    assert np.allclose(d, np.sqrt(8.0 / 3.0), atol=1e-12)


def test_dodecahedron_trivalent():
    poly = geo.convex_hull(geo.platonic("dodecahedron"))
    assert np.all(poly.vertex_degrees() == 3)


def test_cube_faces_merge_to_squares():
    poly = geo.convex_hull(geo.platonic("cube"))
    assert poly.face_sizes() == {4: 6}


def test_hull_rejects_degenerate_inputs():
    rng = np.random.default_rng(0)
    flat = rng.normal(size=(6, 3))
    flat[:, 2] = 0.0
    with pytest.raises(DegenerateHull):
        geo.convex_hull(flat)
    line = np.outer(np.arange(5.0), [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateHull):
        geo.convex_hull(line)
    with pytest.raises(DegenerateHull):
        geo.convex_hull(rng.normal(size=(3, 3)))


def test_hull_rejects_duplicates():
    pts = geo.platonic("octahedron").points.copy()
    pts[1] = pts[0] + 1e-14
    with pytest.raises(DuplicatePoints):
        geo.convex_hull(pts)


def test_euler_fails_for_open_surface():
    poly = geo.convex_hull(geo.platonic("tetrahedron"))
    broken = geo.Polyhedron(poly.vertices, poly.faces[:-1])
    assert geo.check_euler(poly)
    assert not geo.check_euler(broken)


def test_every_edge_in_two_faces():
    for kind in TABLE_COUNTS:
        poly = geo.convex_hull(geo.platonic(kind))
        counts = {}
        for face in poly.faces:
            for a, b in zip(face, face[1:] + face[:1]):
                counts[(min(a, b), max(a, b))] = counts.get((min(a, b), max(a, b)), 0) + 1
        assert set(counts.values()) == {2}


@pytest.mark.parametrize("kind,dual_kind", [
    ("cube", "octahedron"),
    ("octahedron", "cube"),
    ("tetrahedron", "tetrahedron"),
    ("dodecahedron", "icosahedron"),
    ("icosahedron", "dodecahedron"),
])
def test_dual_combinatorics(kind, dual_kind):
    poly = geo.convex_hull(geo.platonic(kind))
    expected = geo.convex_hull(geo.platonic(dual_kind))
    assert geo.combinatorial_signature(geo.dual(poly)) == geo.combinatorial_signature(expected)


def test_double_dual_signature():
    for kind in ("dodecahedron", "cube", "icosahedron"):
        poly = geo.convex_hull(geo.platonic(kind))
        assert geo.combinatorial_signature(geo.dual(geo.dual(poly))) == \
            geo.combinatorial_signature(poly)


def test_signature_invariant_under_similarity():
    rng = np.random.default_rng(7)
    base = geo.platonic("cube").points
    ref = geo.combinatorial_signature(geo.convex_hull(base))
    for trial in range(100):
        rot = Rotation.random(random_state=int(rng.integers(1 << 31))).as_matrix()
        pts = base @ rot.T
        pts = pts * rng.uniform(0.2, 5.0) + rng.normal(size=3)
        pts = pts[rng.permutation(len(pts))]
        assert geo.combinatorial_signature(geo.convex_hull(pts)) == ref


def test_signature_distinguishes_cube_from_antiprism():
    top = np.array([[np.cos(t), np.sin(t), 0.8] for t in 2 * np.pi * np.arange(4) / 4])
    bot = np.array([[np.cos(t + np.pi / 4), np.sin(t + np.pi / 4), -0.8]
                    for t in 2 * np.pi * np.arange(4) / 4])
    anti = geo.convex_hull(np.vstack([top, bot]))
    cube = geo.convex_hull(geo.platonic("cube"))
    assert geo.combinatorial_signature(anti) != geo.combinatorial_signature(cube)


@pytest.mark.parametrize("s,count", [(0, 1), (1, 13), (2, 55), (3, 147), (4, 309)])
def test_mackay_counts(s, count):
    cfg = geo.mackay_icosahedron(s)
    assert len(cfg) == count
    if s > 0:
        assert abs(pdist(cfg.points).min() - 1.0) < 1e-9


def test_mackay_shells():
    sd = geo.shell_decomposition(geo.mackay_icosahedron(2))
    assert sd.sizes == (1, 12, 42)


def test_shell_decomposition_sphere_single_shell():
    sd = geo.shell_decomposition(geo.platonic("icosahedron"))
    assert sd.sizes == (12,)


def test_shell_gap_ratio_validation():
    with pytest.raises(ValueError):
        geo.shell_decomposition(geo.platonic("cube"), gap_ratio=0.9)


def test_truncated_icosahedron():
    poly = geo.truncated_icosahedron()
    assert poly.num_vertices == 60
    assert poly.num_faces == 32
    assert poly.num_edges == 90
    assert poly.face_sizes() == {5: 12, 6: 20}
    assert poly.num_vertices == 2 * poly.num_faces - 4
    assert poly.num_edges == 3 * poly.num_faces - 6
    assert geo.check_euler(poly)


def test_off_round_trip():
    poly = geo.truncated_icosahedron()
    text = poly.to_off()
    lines = text.splitlines()
    assert lines[0] == "OFF"
    assert lines[1] == "60 32 90"
    again = geo.Polyhedron.from_off(text)
    assert geo.check_euler(again)
    assert again.to_off() == text
    assert geo.combinatorial_signature(again) == geo.combinatorial_signature(poly)


def test_configuration_json_round_trip():
    cfg = geo.platonic("octahedron")
    text = cfg.to_json()
    again = geo.Configuration.from_json(text)
    assert again.constraint is geo.Constraint.SPHERE
    assert np.array_equal(again.points, cfg.points)


def test_configuration_validation():
    with pytest.raises(DuplicatePoints):
        geo.Configuration(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        geo.Configuration(np.array([[0.0, 0.0, 0.5], [0.0, 0.0, -1.0]]),
                          geo.Constraint.SPHERE)
    with pytest.raises(ValueError):
        geo.Configuration(np.array([[0.0, 0.0, 0.1], [1.0, 0.0, 0.0]]),
                          geo.Constraint.PLANE)
    with pytest.raises(ValueError):
        geo.Configuration(np.array([[1.5, 0.0, 0.0], [0.5, 0.0, 0.0]]),
                          geo.Constraint.DISK)
    with pytest.raises(ValueError):
        geo.Configuration(np.array([[np.nan, 0.0, 0.0], [1.0, 0.0, 0.0]]))
