"""Constrained local minimization and seeded multi-start global search.

The local method is nonlinear conjugate gradient with Polak-Ribiere
restarts and a backtracking Armijo line search.  Constraints are handled
by projection: gradients are projected onto the feasible directions and
iterates are re-projected (sphere renormalization, plane flattening, disk
clipping) after every step.

Every run is deterministic: per-start generators are derived from the
master seed and the start index, and results merge through an
order-independent reduction, so any degree of parallelism (capped by the
``POLYFORM_THREADS`` environment variable) yields bit-identical output.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from . import energies as en
from .errors import CoincidentPoints, ConstraintMismatch, DegenerateHull, DuplicatePoints, UnsupportedGradient
from .geometry import Configuration, Constraint, combinatorial_signature, convex_hull, mackay_icosahedron, platonic
from .symmetry import canonical_pose

ARMIJO_C1 = 1e-4
MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class OptimizerSettings:
    """Knobs for local minimization and multi-start search.

    ``gtol`` is scaled by the point count to give the convergence
    threshold on the projected gradient norm.  ``start_count`` of None
    means the default budget max(50, 10 n).
    """

    gtol: float = 1e-10
    max_iter: int = 50000
    start_count: int | None = None
    seed: int = 0
    structured_seeds: bool = True

    def __post_init__(self):
        if self.gtol <= 0:
            raise ValueError("gtol must be positive")
        if self.start_count is not None and self.start_count < 1:
            raise ValueError("start_count must be at least 1")

    def budget(self, n: int) -> int:
        return self.start_count if self.start_count is not None else max(50, 10 * n)

    def tolerance(self, n: int) -> float:
        return self.gtol * n

    def to_dict(self) -> dict:
        return {
            "gtol": self.gtol,
            "max_iter": self.max_iter,
            "start_count": self.start_count,
            "seed": self.seed,
            "structured_seeds": self.structured_seeds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerSettings":
        return cls(**{k: d[k] for k in
                      ("gtol", "max_iter", "start_count", "seed", "structured_seeds")
                      if k in d})


@dataclass(frozen=True)
class CensusEntry:
    signature: str
    energy: float
    count: int
    converged: bool


@dataclass(frozen=True)
class MinimizationRun:
    """Full record of one optimization command."""

    model: object
    n: int
    constraint: Constraint
    settings: OptimizerSettings
    best: Configuration
    best_energy: float
    gradient_norm: float
    iterations: int
    starts: int
    converged: bool
    minima: tuple                     # CensusEntry rows, ascending energy
    wall_time: float = 0.0            # informational; excluded from JSON

    def census_rows(self):
        return [{"signature": e.signature, "energy": e.energy, "count": e.count,
                 "converged": e.converged} for e in self.minima]

    def distinct_minima(self, converged_only=True):
        return [e for e in self.minima if e.converged or not converged_only]

    def to_dict(self) -> dict:
        return {
            "model": en.model_to_dict(self.model),
            "n": self.n,
            "constraint": self.constraint.value,
            "settings": self.settings.to_dict(),
            "best_energy": self.best_energy,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "starts": self.starts,
            "converged": self.converged,
            "best_configuration": {
                "constraint": self.best.constraint.value,
                "points": [[float(c) for c in p] for p in self.best.points],
            },
            "minima": self.census_rows(),
        }


# --- constraint projections -------------------------------------------------

def _retract(x, constraint):
    if constraint is Constraint.SPHERE:
        return x / np.linalg.norm(x, axis=1)[:, None]
    if constraint is Constraint.PLANE:
        y = x.copy()
        y[:, 2] = 0.0
        return y
    if constraint is Constraint.DISK:
        y = x.copy()
        y[:, 2] = 0.0
        r = np.linalg.norm(y, axis=1)
        out = r > 1.0
        if np.any(out):
            y[out] /= r[out, None]
        return y
    return x


def _project_gradient(g, x, constraint):
    if constraint is Constraint.SPHERE:
        return g - np.sum(g * x, axis=1)[:, None] * x
    if constraint is Constraint.PLANE:
        h = g.copy()
        h[:, 2] = 0.0
        return h
    if constraint is Constraint.DISK:
        h = g.copy()
        h[:, 2] = 0.0
        r = np.linalg.norm(x, axis=1)
        boundary = r > 1.0 - 1e-9
        if np.any(boundary):
            xb = x[boundary] / r[boundary, None]
            radial = np.sum(h[boundary] * xb, axis=1)
            # clip only the infeasible (outward-pushing) radial component
            clip = np.minimum(radial, 0.0)
            h[boundary] -= clip[:, None] * xb
        return h
    return g


# --- conjugate-gradient core -------------------------------------------------

def _bb_polish(grad, x, constraint, gtol, max_iter=1000):
    """Projected Barzilai-Borwein descent driven by gradients alone.

    Takes over once energy differences fall below float64 resolution, where
    an Armijo search can no longer make progress; spectral steps still
    shrink the gradient norm by orders of magnitude.
    """
    g = _project_gradient(grad(x), x, constraint)
    gnorm = float(np.linalg.norm(g))
    best_x, best_g, best_norm = x, g, gnorm
    prev_x = prev_g = None
    resets = 0
    iters = 0
    for _ in range(max_iter):
        if gnorm <= gtol:
            return x, g, iters, True
        iters += 1
        a = None
        if prev_x is not None:
            s = (x - prev_x).ravel()
            y = (g - prev_g).ravel()
            sy = float(s @ y)
            if sy > 1e-300:
                a = float(s @ s) / sy
        if a is None or not np.isfinite(a) or a <= 0.0:
            a = (0.5 ** resets) * 1e-4 / max(gnorm, 1e-12)
        a = min(a, 1e6)
        prev_x, prev_g = x, g
        x = _retract(x - a * g, constraint)
        g = _project_gradient(grad(x), x, constraint)
        gnorm = float(np.linalg.norm(g))
        if gnorm < best_norm:
            best_x, best_g, best_norm = x, g, gnorm
        elif gnorm > 1e4 * max(best_norm, gtol):
            x, g, gnorm = best_x, best_g, best_norm
            prev_x = prev_g = None
            resets += 1
            if resets > 20:
                break
    return best_x, best_g, iters, best_norm <= gtol


def _ncg(fun, grad, x0, constraint, gtol, max_iter):
    """Projected Polak-Ribiere NCG; returns (x, f, gnorm, iters, converged)."""

    def safe_f(y):
        try:
            v = fun(y)
        except CoincidentPoints:
            return np.inf
        return v if np.isfinite(v) else np.inf

    x = _retract(np.array(x0, dtype=float), constraint)
    fx = safe_f(x)
    g = _project_gradient(grad(x), x, constraint)
    d = -g
    alpha = None
    restart_every = max(30, 3 * x.size)
    iters = 0
    stalled = 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        for it in range(max_iter):
            gg = float(np.vdot(g, g))
            gnorm = math.sqrt(gg)
            if gnorm <= gtol:
                return x, fx, gnorm, iters, True
            if stalled >= 25:
                break  # below float64 energy resolution; hand over to BB
            iters = it + 1
            gTd = float(np.vdot(g, d))
            if gTd >= -1e-18 or it % restart_every == 0:
                d = -g
                gTd = -gg
            a = alpha if alpha is not None else min(1.0, 1.0 / max(gnorm, 1e-12))
            a *= 2.0
            accepted = False
            for _ in range(MAX_BACKTRACKS):
                x_new = _retract(x + a * d, constraint)
                f_new = safe_f(x_new)
                if f_new <= fx + ARMIJO_C1 * a * gTd:
                    accepted = True
                    break
                a *= 0.5
            if not accepted:
                if np.array_equal(d, -g):
                    break
                d = -g
                alpha = None
                continue
            if f_new > fx - 1e-13 * (1.0 + abs(fx)):
                stalled += 1
            else:
                stalled = 0
            g_new = _project_gradient(grad(x_new), x_new, constraint)
            beta = max(0.0, float(np.vdot(g_new, g_new - g)) / gg)
            d = -g_new + beta * d
            x, fx, g, alpha = x_new, f_new, g_new, a
        x, g, extra, ok = _bb_polish(grad, x, constraint, gtol,
                                     max_iter=min(2000, max(50, max_iter - iters)))
        iters += extra
        fx = safe_f(x)
    return x, fx, float(np.linalg.norm(g)), iters, ok


def _model_callables(model):
    return (lambda y: en.energy_of_points(model, y),
            lambda y: en.gradient_of_points(model, y))


# --- random and structured starts --------------------------------------------

def _free_start_radius(model, n):
    if isinstance(model, en.LennardJones):
        return max(1.0, (3.0 * n / (4.0 * math.pi * 0.7)) ** (1.0 / 3.0))
    if isinstance(model, en.CentralCoulomb):
        return (0.76 * n) ** (1.0 / 3.0) * 1.65
    if isinstance(model, en.MonopoleLinear):
        return 2.0 * n / 3.0 + 1.0
    return 1.0


def random_start(model, n, constraint, rng) -> np.ndarray:
    """One random start: uniform on the sphere, or uniform in the ball/disk."""
    if constraint is Constraint.SPHERE:
        x = rng.normal(size=(n, 3))
        return x / np.linalg.norm(x, axis=1)[:, None]
    if constraint in (Constraint.PLANE, Constraint.DISK):
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
        r = np.sqrt(rng.uniform(0.0, 1.0, size=n))
        return np.column_stack([r * np.cos(theta), r * np.sin(theta), np.zeros(n)])
    radius = _free_start_radius(model, n)
    x = rng.normal(size=(n, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    return x * (radius * rng.uniform(0.0, 1.0, size=n)[:, None] ** (1.0 / 3.0))


_MACKAY_SIZES = [1, 13, 55, 147, 309, 561]


def _northby_seed(n):
    """Complete inner Mackay shells plus a greedy partial outer shell."""
    s = next(i for i, size in enumerate(_MACKAY_SIZES) if size >= n)
    if _MACKAY_SIZES[s] == n:
        return mackay_icosahedron(s).points
    inner = mackay_icosahedron(s - 1).points if s >= 1 else np.zeros((1, 3))
    outer_all = mackay_icosahedron(s).points
    # outer-shell candidate sites: those beyond the inner cluster
    inner_keys = {tuple(np.round(p, 6)) for p in inner}
    sites = np.array([p for p in outer_all if tuple(np.round(p, 6)) not in inner_keys])
    sites = sites[np.lexsort(sites.T)]
    chosen = list(inner)
    for _ in range(n - len(inner)):
        best_idx, best_de = 0, np.inf
        cur = np.array(chosen)
        for idx in range(len(sites)):
            r = np.linalg.norm(cur - sites[idx], axis=1)
            if r.min() < 0.5:
                continue
            r6 = r ** -6.0
            de = float(np.sum(r6 * r6 - 2.0 * r6))
            if de < best_de - 1e-12:
                best_idx, best_de = idx, de
        chosen.append(sites[best_idx])
        sites = np.delete(sites, best_idx, axis=0)
    return np.array(chosen)


def _ring_seed(n, ring):
    """Regular ring of `ring` points plus n - ring interior points (z = 0)."""
    inner = n - ring
    theta = 2.0 * math.pi * np.arange(ring) / ring
    pts = [np.column_stack([np.cos(theta), np.sin(theta), np.zeros(ring)])]
    if inner == 1:
        pts.append(np.zeros((1, 3)))
    elif inner > 1:
        phi = 2.0 * math.pi * np.arange(inner) / inner + 0.3
        pts.append(0.35 * np.column_stack([np.cos(phi), np.sin(phi), np.zeros(inner)]))
    return np.vstack(pts)


_PLATONIC_BY_N = {4: "tetrahedron", 6: "octahedron", 8: "cube",
                  12: "icosahedron", 20: "dodecahedron"}


def structured_seeds(model, n, constraint):
    """Deterministic warm starts: Platonic solids, Mackay/Northby clusters,
    ring-plus-interior planar arrangements."""
    seeds = []
    if constraint is Constraint.SPHERE and n in _PLATONIC_BY_N:
        seeds.append(platonic(_PLATONIC_BY_N[n]).points)
    if isinstance(model, en.LennardJones) and 2 <= n <= _MACKAY_SIZES[-1]:
        seeds.append(_northby_seed(n))
    if constraint in (Constraint.PLANE, Constraint.DISK):
        for ring in range(max(2, n - 4), n + 1):
            seeds.append(_ring_seed(n, ring))
    if isinstance(model, (en.AtiyahDet, en.TriangleApprox)) and \
            constraint is Constraint.FREE and n in _PLATONIC_BY_N:
        seeds.append(platonic(_PLATONIC_BY_N[n]).points)
    if constraint is Constraint.DISK:
        seeds = [0.999 * s for s in seeds]
    return seeds


# --- census keys --------------------------------------------------------------

def census_signature(points) -> str:
    """Hex digest identifying a minimum: hull combinatorics, or the scaled
    distance multiset when the hull is degenerate."""
    pts = np.asarray(points, dtype=float)
    try:
        raw = combinatorial_signature(convex_hull(pts))
    except (DegenerateHull, DuplicatePoints):
        d = np.sort(pdist(pts))
        raw = b"dist:" + np.round(d / d[0], 6).tobytes()
    return hashlib.blake2b(raw, digest_size=8).hexdigest()


def _census_key(energy, sig_hex):
    return (round(energy, 6), sig_hex)


# --- start execution ----------------------------------------------------------

def _run_start(model, x0, constraint, settings, n):
    f, g = _model_callables(model)
    x, fx, gnorm, iters, ok = _ncg(f, g, x0, constraint, settings.tolerance(n),
                                   settings.max_iter)
    return x, fx, gnorm, iters, ok


def _start_payload(args):
    model_dict, x0, constraint_value, settings_dict, n = args
    model = en.model_from_dict(model_dict)
    constraint = Constraint(constraint_value)
    settings = OptimizerSettings.from_dict(settings_dict)
    x, fx, gnorm, iters, ok = _run_start(model, x0, constraint, settings, n)
    sig = census_signature(x)
    canon = np.round(canonical_pose(x), 9) + 0.0
    return x, fx, gnorm, iters, ok, sig, canon.tobytes()


def _thread_count() -> int:
    env = os.environ.get("POLYFORM_THREADS")
    if env is None:
        return 1
    v = int(env)
    return (os.cpu_count() or 1) if v == 0 else max(1, v)


def _map_starts(tasks):
    workers = _thread_count()
    if workers <= 1 or len(tasks) <= 1:
        return [_start_payload(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_start_payload, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _merge_results(model, n, constraint, settings, results, wall):
    total_iters = 0
    best_rank = None
    best = None
    groups = {}  # (energy rounded to 1e-6, signature) -> [energy, canon, count, converged]
    for x, fx, gnorm, iters, ok, sig, canon in results:
        total_iters += iters
        key = _census_key(fx, sig)
        grp = groups.get(key)
        if grp is None:
            groups[key] = [fx, canon, 1, ok]
        else:
            grp[2] += 1
            grp[3] = grp[3] or ok
            if (fx, canon) < (grp[0], grp[1]):
                grp[0], grp[1] = fx, canon
        rank = (not ok, fx, canon)  # converged runs always beat flagged ones
        if best_rank is None or rank < best_rank:
            best_rank = rank
            best = (x, fx, gnorm, iters, ok)
    x, fx, gnorm, iters, ok = best
    minima = tuple(sorted(
        (CensusEntry(signature=sig, energy=e, count=cnt, converged=flag)
         for (_er, sig), (e, _c, cnt, flag) in groups.items()),
        key=lambda entry: (entry.energy, entry.signature)))
    return MinimizationRun(
        model=model, n=n, constraint=constraint, settings=settings,
        best=Configuration(_retract(x, constraint), constraint),
        best_energy=fx, gradient_norm=gnorm, iterations=total_iters,
        starts=len(results), converged=ok, minima=minima, wall_time=wall,
    )


def _validate(model, n, constraint):
    if constraint not in en.allowed_constraints(model):
        raise ConstraintMismatch(
            f"{model.tag} does not accept the {constraint.value} constraint")
    if n < en.min_points(model):
        raise ValueError(f"{model.tag} needs at least {en.min_points(model)} points")
    if isinstance(model, en.MaximinDistance):
        raise UnsupportedGradient("use tammes_solve for the maximin objective")


def local_minimize(model, start: Configuration,
                   settings: OptimizerSettings = OptimizerSettings()) -> MinimizationRun:
    """Minimize from one given configuration; never switches basins on purpose."""
    n = len(start)
    _validate(model, n, start.constraint)
    t0 = time.perf_counter()
    task = (en.model_to_dict(model), np.asarray(start.points, float),
            start.constraint.value, settings.to_dict(), n)
    results = [_start_payload(task)]
    return _merge_results(model, n, start.constraint, settings, results,
                          time.perf_counter() - t0)


def multi_start(model, n: int, settings: OptimizerSettings = OptimizerSettings(),
                constraint: Constraint | None = None) -> MinimizationRun:
    """Independent seeded local minimizations; lowest converged energy wins.

    Ties break on the canonical (principal-axis) coordinate encoding, so the
    merged result never depends on scheduling order.
    """
    if constraint is None:
        constraint = en.default_constraint(model)
    _validate(model, n, constraint)
    t0 = time.perf_counter()
    starts = []
    if settings.structured_seeds:
        starts.extend(structured_seeds(model, n, constraint))
    for idx in range(settings.budget(n)):
        rng = np.random.default_rng([settings.seed, idx])
        starts.append(random_start(model, n, constraint, rng))
    model_dict = en.model_to_dict(model)
    settings_dict = settings.to_dict()
    tasks = [(model_dict, x0, constraint.value, settings_dict, n) for x0 in starts]
    results = _map_starts(tasks)
    return _merge_results(model, n, constraint, settings, results,
                          time.perf_counter() - t0)


def minima_census(model, n: int, settings: OptimizerSettings = OptimizerSettings(),
                  constraint: Constraint | None = None) -> MinimizationRun:
    """Multi-start search keeping every distinct converged minimum found."""
    return multi_start(model, n, settings, constraint)


# --- Tammes continuation -------------------------------------------------------

def _riesz_log_callables(p):
    def fun(x):
        i, j, d, r = en._pairs(x)
        m = r.min()
        w = (m / r) ** p
        return -p * math.log(m) + math.log(float(np.sum(w)))

    def grad(x):
        i, j, d, r = en._pairs(x)
        m = r.min()
        w = (m / r) ** p
        s = float(np.sum(w))
        coeff = -p * w / (s * r * r)
        term = coeff[:, None] * d
        g = np.zeros_like(x)
        np.add.at(g, i, term)
        np.add.at(g, j, -term)
        return g

    return fun, grad


def _maximin_polish(x, max_rounds=2000):
    """Subgradient ascent on the minimum distance: push apart only the
    closest pairs, halving the step when it stops helping."""
    x = _retract(x, Constraint.SPHERE)
    best = pdist(x).min()
    step = 0.1
    for _ in range(max_rounds):
        if step < 1e-12:
            break
        d = pdist(x)
        dmin = d.min()
        n = len(x)
        iu, ju = np.triu_indices(n, 1)
        active = d < dmin * (1.0 + 1e-6)
        push = np.zeros_like(x)
        for a, b in zip(iu[active], ju[active]):
            u = x[a] - x[b]
            u /= np.linalg.norm(u)
            push[a] += u
            push[b] -= u
        norms = np.linalg.norm(push, axis=1)
        moving = norms > 1e-12
        if not np.any(moving):
            break
        push[moving] /= norms[moving, None]
        trial = _retract(x + step * dmin * push, Constraint.SPHERE)
        gain = pdist(trial).min() - best
        if gain > 0.0:
            x = trial
            best += gain
            if gain < 1e-10:
                break
            step *= 1.2
        else:
            step *= 0.5
    return x, best


def tammes_solve(n: int, settings: OptimizerSettings = OptimizerSettings()) -> MinimizationRun:
    """Packing on the sphere by Riesz continuation plus a maximin polish.

    Minimizes the p-energy for p = 2, 4, ..., 1024 (warm starts, evaluated
    in log form so large exponents stay finite), then locally maximizes the
    minimum pairwise distance.  Reported energy is minus that distance.
    """
    if n < 2:
        raise ValueError("tammes needs at least 2 points")
    t0 = time.perf_counter()
    run = multi_start(en.RieszSphere(2.0), n, settings)
    x = np.asarray(run.best.points, float)
    total_iters = run.iterations
    p = 4.0
    while p <= 1024.0:
        fun, grad = _riesz_log_callables(p)
        x, _fx, _gn, iters, _ok = _ncg(fun, grad, x, Constraint.SPHERE,
                                       settings.tolerance(n), settings.max_iter)
        total_iters += iters
        p *= 2.0
    x, dmin = _maximin_polish(x)
    model = en.MaximinDistance()
    best = Configuration(_retract(x, Constraint.SPHERE), Constraint.SPHERE)
    sig = census_signature(best.points)
    return MinimizationRun(
        model=model, n=n, constraint=Constraint.SPHERE, settings=settings,
        best=best, best_energy=-dmin, gradient_norm=0.0, iterations=total_iters,
        starts=run.starts, converged=True,
        minima=(CensusEntry(signature=sig, energy=-dmin, count=1, converged=True),),
        wall_time=time.perf_counter() - t0,
    )
