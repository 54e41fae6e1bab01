"""Tests for the energy functionals, gradients and the determinant energy."""

import itertools

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from polyform import energies as en
from polyform.errors import CoincidentPoints, ConstraintMismatch, UnsupportedGradient
from polyform.geometry import Configuration, Constraint, platonic

EQUILATERAL = np.array([[1.0, 0.0, 0.0],
                        [-0.5, np.sqrt(3.0) / 2.0, 0.0],
                        [-0.5, -np.sqrt(3.0) / 2.0, 0.0]])

SMOOTH_MODELS = [en.RieszSphere(1.0), en.RieszSphere(3.0), en.SumSeparation(),
                 en.CentralCoulomb(), en.MonopoleLinear(), en.LennardJones(),
                 en.AtiyahDet(), en.TriangleApprox()]


def antipodal():
    return Configuration(np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]),
                         Constraint.SPHERE)


def test_coulomb_examples():
    assert en.energy(en.RieszSphere(1.0), antipodal()) == pytest.approx(0.5, abs=1e-12)
    cfg = Configuration(EQUILATERAL, Constraint.SPHERE)
    assert en.energy(en.RieszSphere(1.0), cfg) == pytest.approx(np.sqrt(3.0), abs=1e-12)


def test_lennard_jones_unit_pair():
    cfg = Configuration(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    assert en.energy(en.LennardJones(), cfg) == pytest.approx(-1.0, abs=1e-12)


def test_monopole_two_points():
    cfg = Configuration(np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]))
    assert en.energy(en.MonopoleLinear(), cfg) == pytest.approx(-1.0, abs=1e-12)


def test_triangle_energy_equilateral():
    cfg = Configuration(EQUILATERAL)
    assert en.energy(en.TriangleApprox(), cfg) == pytest.approx(-np.log(9.0 / 8.0), abs=1e-12)


def test_sum_separation_sign_convention():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(6, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    cfg = Configuration(x, Constraint.SPHERE)
    expected = -sum(np.linalg.norm(x[i] - x[j]) for i, j in itertools.combinations(range(6), 2))
    assert en.energy(en.SumSeparation(), cfg) == pytest.approx(expected, rel=1e-14)


def test_constraint_mismatch():
    free_pair = Configuration(np.array([[0.0, 0.0, 0.3], [0.0, 0.0, -0.3]]))
    with pytest.raises(ConstraintMismatch):
        en.energy(en.RieszSphere(1.0), free_pair)
    with pytest.raises(ConstraintMismatch):
        en.energy(en.LennardJones(), antipodal())


def test_coincident_points_error():
    x = np.array([[0.0, 0.0, 0.0], [1e-13, 0.0, 0.0], [1.0, 0.0, 0.0]])
    with pytest.raises(CoincidentPoints):
        en.energy_of_points(en.LennardJones(), x)
    with pytest.raises(CoincidentPoints):
        en.three_point_energy(*x)


def test_maximin_energy_and_gradient():
    assert en.energy(en.MaximinDistance(), antipodal()) == pytest.approx(-2.0)
    with pytest.raises(UnsupportedGradient):
        en.gradient(en.MaximinDistance(), antipodal())


def test_min_pair_distance():
    assert en.min_pair_distance(antipodal()) == pytest.approx(2.0)
    octa = platonic("octahedron")
    assert en.min_pair_distance(octa) == pytest.approx(np.sqrt(2.0), abs=1e-12)
    ico = platonic("icosahedron")
    expected = 4.0 / np.sqrt(10.0 + 2.0 * np.sqrt(5.0))
    assert en.min_pair_distance(ico) == pytest.approx(expected, abs=1e-12)


def _directional_fd(model, x, rng, h=1e-5):
    u = rng.normal(size=x.shape)
    u /= np.linalg.norm(u)
    fp = en.energy_of_points(model, x + h * u)
    fm = en.energy_of_points(model, x - h * u)
    return u, (fp - fm) / (2.0 * h)


@pytest.mark.parametrize("model", SMOOTH_MODELS, ids=lambda m: m.tag + str(getattr(m, "p", "")))
def test_gradient_matches_finite_differences(model):
    rng = np.random.default_rng(12)
    for n in range(max(3, en.min_points(model)), 13, 3):
        for _ in range(8):
            x = rng.normal(size=(n, 3))
            if isinstance(model, en.LennardJones):
                x *= 0.9 * n ** (1.0 / 3.0)
            g = en.gradient_of_points(model, x)
            u, fd = _directional_fd(model, x, rng)
            scale = max(np.linalg.norm(g), 1e-10)
            assert abs(float(np.sum(g * u)) - fd) / scale < 1e-6


def test_central_gradient_is_equilibrium_residual():
    d = 2.0 ** (1.0 / 3.0)
    x = np.array([[0.0, 0.0, d / 2.0], [0.0, 0.0, -d / 2.0]])
    g = en.gradient_of_points(en.CentralCoulomb(), x)
    assert np.abs(g).max() < 1e-10


def test_riesz_gradient_radial_on_tetrahedron():
    x = platonic("tetrahedron").points
    g = en.gradient_of_points(en.RieszSphere(1.0), x)
    tangential = g - np.sum(g * x, axis=1)[:, None] * x
    assert np.abs(tangential).max() < 1e-10


def test_sphere_energies_rotation_invariant():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(8, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    models = [en.RieszSphere(1.0), en.SumSeparation(), en.MaximinDistance()]
    base = [en.energy_of_points(m, x) for m in models]
    for _ in range(100):
        rot = Rotation.random(random_state=int(rng.integers(1 << 31))).as_matrix()
        y = x @ rot.T
        for m, b in zip(models, base):
            assert abs(en.energy_of_points(m, y) - b) <= 1e-12 * abs(b)


def test_central_terms_rotation_but_not_translation_invariant():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(6, 3)) * 1.5
    for model in (en.CentralCoulomb(), en.MonopoleLinear()):
        base = en.energy_of_points(model, x)
        rot = Rotation.random(random_state=3).as_matrix()
        assert en.energy_of_points(model, x @ rot.T) == pytest.approx(base, rel=1e-12)
        shifted = en.energy_of_points(model, x + np.array([0.7, -0.2, 0.4]))
        assert abs(shifted - base) > 1e-6


# --- Atiyah determinant ------------------------------------------------------

def test_atiyah_two_points_and_collinear():
    rng = np.random.default_rng(9)
    for n in (2, 3, 4, 5):
        for _ in range(20):
            t = np.sort(rng.normal(size=n))
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            pts = np.outer(t, direction) + rng.normal(size=3)
            if np.abs(np.diff(t)).min() < 1e-6:
                continue
            assert en.atiyah_determinant(pts).modulus == pytest.approx(1.0, abs=1e-9)


def test_atiyah_equilateral_triangle():
    rng = np.random.default_rng(10)
    for _ in range(25):
        rot = Rotation.random(random_state=int(rng.integers(1 << 31))).as_matrix()
        pts = rng.uniform(0.3, 4.0) * EQUILATERAL @ rot.T + rng.normal(size=3)
        assert en.atiyah_determinant(pts).modulus == pytest.approx(9.0 / 8.0, abs=1e-9)


def test_atiyah_similarity_invariance():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(7, 3))
    base = en.atiyah_determinant(pts).modulus
    for _ in range(100):
        rot = Rotation.random(random_state=int(rng.integers(1 << 31))).as_matrix()
        moved = rng.uniform(0.1, 8.0) * pts @ rot.T + rng.normal(size=3) * 3.0
        val = en.atiyah_determinant(moved).modulus
        assert abs(val - base) / base < 1e-9


def test_atiyah_modulus_at_least_one_sampled():
    rng = np.random.default_rng(13)
    worst = np.inf
    for _ in range(500):
        n = int(rng.integers(2, 9))
        pts = rng.normal(size=(n, 3))
        if rng.random() < 0.3:
            pts[:, 2] = 0.0
        worst = min(worst, en.atiyah_determinant(pts).modulus)
    assert worst >= 1.0 - 1e-9


def test_atiyah_phase_flagged_unreliable():
    res = en.atiyah_determinant(EQUILATERAL)
    assert res.phase_unreliable


def test_three_point_energy_examples():
    assert en.three_point_energy(*EQUILATERAL) == pytest.approx(-np.log(9.0 / 8.0), abs=1e-12)
    collinear = [np.array([0.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]),
                 np.array([2.7, 0.0, 0.0])]
    assert en.three_point_energy(*collinear) == 0.0


def test_three_point_matches_atiyah_for_triples():
    rng = np.random.default_rng(14)
    for _ in range(30):
        pts = rng.normal(size=(3, 3))
        e_det = -np.log(en.atiyah_determinant(pts).modulus)
        e_tri = en.three_point_energy(*pts)
        assert e_det == pytest.approx(e_tri, abs=1e-10)


def test_triangle_energy_is_average_over_triples():
    rng = np.random.default_rng(15)
    for n in (4, 6, 8):
        pts = rng.normal(size=(n, 3))
        avg = np.mean([en.three_point_energy(pts[a], pts[b], pts[c])
                       for a, b, c in itertools.combinations(range(n), 3)])
        assert en.energy_of_points(en.TriangleApprox(), pts) == pytest.approx(avg, abs=1e-12)


def test_model_serialization_round_trip():
    for model in SMOOTH_MODELS + [en.MaximinDistance()]:
        again = en.model_from_dict(en.model_to_dict(model))
        assert again == model
