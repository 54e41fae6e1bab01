"""Tests for local minimization, multi-start search and the Tammes solver."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from polyform import energies as en
from polyform import optimize as opt
from polyform.errors import ConstraintMismatch, UnsupportedGradient
from polyform.geometry import Configuration, Constraint, platonic, shell_decomposition
from polyform.symmetry import detect_point_group


def settings(**kw):
    kw.setdefault("seed", 0)
    return opt.OptimizerSettings(**kw)


def test_thomson4_is_tetrahedron():
    run = opt.multi_start(en.RieszSphere(1.0), 4, settings(start_count=15))
    assert run.converged
    d = pdist(run.best.points)
    assert np.abs(d - np.sqrt(8.0 / 3.0)).max() < 1e-6


def test_local_minimize_from_critical_point_returns_immediately():
    run = opt.local_minimize(en.RieszSphere(1.0), platonic("tetrahedron"), settings())
    assert run.iterations <= 1
    assert run.best_energy == pytest.approx(
        en.energy(en.RieszSphere(1.0), platonic("tetrahedron")), abs=1e-12)


def test_local_minimize_decreases_energy_and_reaches_tolerance():
    rng = np.random.default_rng(2)
    x0 = rng.normal(size=(7, 3))
    x0 /= np.linalg.norm(x0, axis=1)[:, None]
    start = Configuration(x0, Constraint.SPHERE)
    model = en.RieszSphere(1.0)
    run = opt.local_minimize(model, start, settings())
    assert run.converged
    assert run.best_energy <= en.energy(model, start)
    assert run.gradient_norm <= settings().tolerance(7)
    radii = np.linalg.norm(run.best.points, axis=1)
    assert np.abs(radii - 1.0).max() <= 1e-12


def test_central_two_point_minimizer_radius():
    run = opt.multi_start(en.CentralCoulomb(), 2, settings(start_count=5))
    radii = np.linalg.norm(run.best.points, axis=1)
    assert np.abs(radii - 2.0 ** (1.0 / 3.0) / 2.0).max() < 1e-6


def test_central_equilibrium_residual():
    run = opt.multi_start(en.CentralCoulomb(), 9, settings(start_count=20))
    g = en.gradient(en.CentralCoulomb(), run.best)
    assert np.linalg.norm(g, axis=1).max() <= 1e-8


def test_thomson8_antiprism_beats_cube():
    run = opt.multi_start(en.RieszSphere(1.0), 8, settings(start_count=40))
    cube_energy = en.energy(en.RieszSphere(1.0), platonic("cube"))
    assert run.best_energy < cube_energy - 1e-6
    assert detect_point_group(run.best).label.text == "D_4d"


def test_lj13_structured_seed_finds_mackay():
    run = opt.multi_start(en.LennardJones(), 13, settings(start_count=5))
    assert run.best_energy == pytest.approx(-44.326801, abs=1e-5)
    assert shell_decomposition(run.best).sizes == (1, 12)


def test_census_unique_minimum_for_thomson4():
    run = opt.minima_census(en.RieszSphere(1.0), 4, settings(start_count=100))
    converged = run.distinct_minima(converged_only=True)
    assert len(converged) == 1
    assert converged[0].count >= 100


def test_census_best_is_lowest_converged():
    run = opt.multi_start(en.LennardJones(), 9, settings(start_count=60))
    converged = run.distinct_minima(converged_only=True)
    assert converged
    assert run.best_energy <= min(e.energy for e in converged) + 1e-12


def test_nonconverged_flagged_and_kept():
    run = opt.multi_start(en.RieszSphere(1.0), 9,
                          settings(start_count=3, max_iter=2))
    assert not run.converged
    assert all(not e.converged for e in run.minima)


def test_validation_errors():
    with pytest.raises(ConstraintMismatch):
        opt.multi_start(en.LennardJones(), 5, settings(start_count=2),
                        Constraint.SPHERE)
    with pytest.raises(UnsupportedGradient):
        opt.multi_start(en.MaximinDistance(), 5, settings(start_count=2))
    with pytest.raises(ValueError):
        opt.multi_start(en.RieszSphere(1.0), 1, settings(start_count=2))


def test_determinism_same_seed_same_json():
    a = opt.multi_start(en.RieszSphere(1.0), 6, settings(start_count=12, seed=9))
    b = opt.multi_start(en.RieszSphere(1.0), 6, settings(start_count=12, seed=9))
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def test_determinism_across_parallelism():
    serial = opt.multi_start(en.RieszSphere(1.0), 6, settings(start_count=10, seed=4))
    env_before = os.environ.get("POLYFORM_THREADS")
    os.environ["POLYFORM_THREADS"] = "2"
    try:
        parallel = opt.multi_start(en.RieszSphere(1.0), 6, settings(start_count=10, seed=4))
    finally:
        if env_before is None:
            del os.environ["POLYFORM_THREADS"]
        else:
            os.environ["POLYFORM_THREADS"] = env_before
    assert json.dumps(serial.to_dict(), sort_keys=True) == \
        json.dumps(parallel.to_dict(), sort_keys=True)


def test_different_seeds_differ_somewhere():
    a = opt.multi_start(en.LennardJones(), 8, settings(start_count=5, seed=1,
                                                       structured_seeds=False))
    b = opt.multi_start(en.LennardJones(), 8, settings(start_count=5, seed=2,
                                                       structured_seeds=False))
    assert not np.array_equal(a.best.points, b.best.points)


def test_tammes_two_points():
    run = opt.tammes_solve(2, settings(start_count=3))
    assert -run.best_energy == pytest.approx(2.0, abs=1e-8)


def test_tammes_six_points_octahedron():
    run = opt.tammes_solve(6, settings(start_count=10))
    assert -run.best_energy == pytest.approx(np.sqrt(2.0), abs=1e-4)
    assert en.min_pair_distance(run.best) == pytest.approx(-run.best_energy, abs=1e-12)


def test_run_record_round_trip():
    run = opt.multi_start(en.RieszSphere(1.0), 4, settings(start_count=5))
    record = run.to_dict()
    assert record["model"] == {"model": "riesz", "p": 1.0}
    cfg = Configuration(np.array(record["best_configuration"]["points"]),
                        Constraint.parse(record["best_configuration"]["constraint"]))
    assert len(cfg) == 4
    assert "wall_time" not in json.dumps(record)


def test_disk_constraint_projection():
    run = opt.multi_start(en.RieszSphere(1.0), 7, settings(start_count=15),
                          Constraint.DISK)
    assert run.converged
    pts = run.best.points
    assert np.all(pts[:, 2] == 0.0)
    assert np.linalg.norm(pts, axis=1).max() <= 1.0 + 1e-12
