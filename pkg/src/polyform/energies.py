"""Energy functionals on point configurations and their analytic gradients.

All pairwise sums run over j < i, matching the 1/2-free convention of the
energies implemented here.  Gradients are ambient (pre-projection); the
optimizer applies constraint projections on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist

from .errors import CoincidentPoints, ConstraintMismatch, UnsupportedGradient
from .geometry import COINCIDENCE_TOL, Configuration, Constraint

DEGENERATE_ANGLE = 1e-12  # rad; triangles thinner than this count as collinear


@dataclass(frozen=True)
class RieszSphere:
    """Inverse power-law repulsion 1/r^p on the unit sphere; p=1 is Coulomb."""

    p: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValueError("Riesz exponent p must be positive and finite")

    tag = "riesz"


@dataclass(frozen=True)
class SumSeparation:
    """Negated sum of all mutual separations (maximizing total distance)."""

    tag = "sumsep"


@dataclass(frozen=True)
class MaximinDistance:
    """Negated minimum pairwise distance; the non-smooth packing objective."""

    tag = "maximin"


@dataclass(frozen=True)
class CentralCoulomb:
    """Coulomb repulsion balanced by a harmonic pull toward the origin."""

    tag = "central"


@dataclass(frozen=True)
class MonopoleLinear:
    """Linear pairwise attraction -r balanced by the same harmonic term."""

    tag = "monopole"


@dataclass(frozen=True)
class LennardJones:
    """Reduced 12-6 pair potential with unit equilibrium distance and depth."""

    tag = "lj"


@dataclass(frozen=True)
class AtiyahDet:
    """-log of the normalized direction-determinant modulus; scale invariant."""

    tag = "atiyah"


@dataclass(frozen=True)
class TriangleApprox:
    """Average three-point triangle energy over all point triples."""

    tag = "triangle"


MODEL_TYPES = (RieszSphere, SumSeparation, MaximinDistance, CentralCoulomb,
               MonopoleLinear, LennardJones, AtiyahDet, TriangleApprox)

_ALLOWED = {
    RieszSphere: (Constraint.SPHERE, Constraint.DISK),
    SumSeparation: (Constraint.SPHERE,),
    MaximinDistance: (Constraint.SPHERE,),
    CentralCoulomb: (Constraint.FREE,),
    MonopoleLinear: (Constraint.FREE,),
    LennardJones: (Constraint.FREE,),
    AtiyahDet: (Constraint.FREE, Constraint.PLANE, Constraint.SPHERE),
    TriangleApprox: (Constraint.FREE, Constraint.PLANE, Constraint.SPHERE),
}


def allowed_constraints(model):
    return _ALLOWED[type(model)]


def default_constraint(model) -> Constraint:
    return _ALLOWED[type(model)][0]


def min_points(model) -> int:
    return 3 if isinstance(model, TriangleApprox) else 2


def model_to_dict(model) -> dict:
    d = {"model": model.tag}
    if isinstance(model, RieszSphere):
        d["p"] = float(model.p)
    return d


def model_from_dict(d: dict):
    by_tag = {t.tag: t for t in MODEL_TYPES}
    cls = by_tag[d["model"]]
    if cls is RieszSphere:
        return RieszSphere(float(d.get("p", 1.0)))
    return cls()


def _check(model, config: Configuration):
    if config.constraint not in allowed_constraints(model):
        raise ConstraintMismatch(
            f"{model.tag} does not accept the {config.constraint.value} constraint")
    if len(config) < min_points(model):
        raise ValueError(f"{model.tag} needs at least {min_points(model)} points")


def _pairs(x):
    n = len(x)
    i, j = np.triu_indices(n, 1)
    d = x[i] - x[j]
    r = np.linalg.norm(d, axis=1)
    if r.min() < COINCIDENCE_TOL:
        raise CoincidentPoints("pairwise distance below coincidence tolerance")
    return i, j, d, r


def energy(model, config: Configuration) -> float:
    """Value of the model's energy functional at the configuration."""
    _check(model, config)
    return energy_of_points(model, np.asarray(config.points, dtype=float))


def gradient(model, config: Configuration) -> np.ndarray:
    """Exact ambient gradient, shape (n, 3), before any constraint projection."""
    _check(model, config)
    return gradient_of_points(model, np.asarray(config.points, dtype=float))


def energy_of_points(model, x: np.ndarray) -> float:
    """Constraint-unchecked energy on a raw (n, 3) array (optimizer path)."""
    if isinstance(model, AtiyahDet):
        return -_atiyah_logabs(x)
    if isinstance(model, TriangleApprox):
        return _triangle_energy(x)
    if isinstance(model, MaximinDistance):
        return -float(pdist(x).min())
    _, _, _, r = _pairs(x)
    if isinstance(model, RieszSphere):
        return float(np.sum(r ** -model.p))
    if isinstance(model, SumSeparation):
        return -float(np.sum(r))
    if isinstance(model, CentralCoulomb):
        return float(np.sum(1.0 / r) + 0.5 * np.sum(x * x))
    if isinstance(model, MonopoleLinear):
        return float(-np.sum(r) + 0.5 * np.sum(x * x))
    if isinstance(model, LennardJones):
        r6 = r ** -6
        return float(np.sum(r6 * r6 - 2.0 * r6))
    raise TypeError(f"unknown energy model {model!r}")


def gradient_of_points(model, x: np.ndarray) -> np.ndarray:
    """Constraint-unchecked analytic gradient on a raw (n, 3) array."""
    if isinstance(model, MaximinDistance):
        raise UnsupportedGradient("maximin objective is non-smooth")
    if isinstance(model, AtiyahDet):
        return _atiyah_gradient(x)
    if isinstance(model, TriangleApprox):
        return _triangle_gradient(x)
    i, j, d, r = _pairs(x)
    if isinstance(model, RieszSphere):
        w = -model.p * r ** -(model.p + 2.0)
    elif isinstance(model, SumSeparation):
        w = -1.0 / r
    elif isinstance(model, CentralCoulomb):
        w = -r ** -3.0
    elif isinstance(model, MonopoleLinear):
        w = -1.0 / r
    elif isinstance(model, LennardJones):
        w = -12.0 * (r ** -14 - r ** -8)
    else:
        raise TypeError(f"unknown energy model {model!r}")
    term = w[:, None] * d
    g = np.zeros_like(x)
    np.add.at(g, i, term)
    np.add.at(g, j, -term)
    if isinstance(model, (CentralCoulomb, MonopoleLinear)):
        g += x
    return g


def min_pair_distance(config) -> float:
    """Minimum Euclidean distance over all point pairs."""
    pts = config.points if isinstance(config, Configuration) else np.asarray(config)
    return float(pdist(pts).min())


# --- three-point (triangle) energy ----------------------------------------

def _cos_angles(a, b, c):
    """Cosines of the interior angles at a, b, c."""
    ab, ac, bc = b - a, c - a, c - b
    lab, lac, lbc = np.linalg.norm(ab), np.linalg.norm(ac), np.linalg.norm(bc)
    if min(lab, lac, lbc) < COINCIDENCE_TOL:
        raise CoincidentPoints("degenerate triangle: coincident vertices")
    ca = np.dot(ab, ac) / (lab * lac)
    cb = np.dot(-ab, bc) / (lab * lbc)
    cc = np.dot(ac, bc) / (lac * lbc)
    return ca, cb, cc


def three_point_energy(a, b, c) -> float:
    """Triangle energy -log(3/4 + (cos t1 + cos t2 + cos t3)/4).

    Collinear triples (minimum interior angle below ``DEGENERATE_ANGLE``)
    return exactly 0, the analytic limit.
    """
    ca, cb, cc = _cos_angles(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    min_angle = np.arccos(np.clip(max(ca, cb, cc), -1.0, 1.0))
    if min_angle < DEGENERATE_ANGLE:
        return 0.0
    return float(-np.log(0.75 + 0.25 * (ca + cb + cc)))


def _triples(n):
    i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    mask = (i < j) & (j < k)
    return i[mask], j[mask], k[mask]


def _triangle_terms(x):
    n = len(x)
    if n < 3:
        raise ValueError("triangle energy needs at least 3 points")
    i, j, k = _triples(n)
    if pdist(x).min() < COINCIDENCE_TOL:
        raise CoincidentPoints("pairwise distance below coincidence tolerance")
    u = x[j] - x[i]
    v = x[k] - x[i]
    w = x[k] - x[j]
    lu = np.linalg.norm(u, axis=1)
    lv = np.linalg.norm(v, axis=1)
    lw = np.linalg.norm(w, axis=1)
    ci = np.einsum("ab,ab->a", u, v) / (lu * lv)
    cj = np.einsum("ab,ab->a", -u, w) / (lu * lw)
    ck = np.einsum("ab,ab->a", v, w) / (lv * lw)
    s = 0.75 + 0.25 * (ci + cj + ck)
    return (i, j, k), (u, v, w), (lu, lv, lw), (ci, cj, ck), s


def _triangle_energy(x):
    n = len(x)
    *_, s = _triangle_terms(x)
    return float(-np.sum(np.log(s)) / len(s)) if len(s) else 0.0


def _triangle_gradient(x):
    (i, j, k), (u, v, w), (lu, lv, lw), (ci, cj, ck), s = _triangle_terms(x)
    uh = u / lu[:, None]
    vh = v / lv[:, None]
    wh = w / lw[:, None]
    # For cos = ph.qh with p, q emanating from the angle vertex, the head of p
    # moves cos by (qh - cos ph)/|p|; the vertex itself gets minus the sum.
    d_ci_j = (vh - ci[:, None] * uh) / lu[:, None]
    d_ci_k = (uh - ci[:, None] * vh) / lv[:, None]
    d_cj_i = (wh + cj[:, None] * uh) / lu[:, None]
    d_cj_k = (-uh - cj[:, None] * wh) / lw[:, None]
    d_ck_i = (-wh + ck[:, None] * vh) / lv[:, None]
    d_ck_j = (-vh + ck[:, None] * wh) / lw[:, None]
    gi = -(d_ci_j + d_ci_k) + d_cj_i + d_ck_i
    gj = d_ci_j - (d_cj_i + d_cj_k) + d_ck_j
    gk = d_ci_k + d_cj_k - (d_ck_i + d_ck_j)
    coef = (-0.25 / s)[:, None] / len(s)
    g = np.zeros_like(x)
    np.add.at(g, i, coef * gi)
    np.add.at(g, j, coef * gj)
    np.add.at(g, k, coef * gk)
    return g


# --- Atiyah determinant -----------------------------------------------------

class AtiyahDeterminant(NamedTuple):
    modulus: float
    phase_unreliable: bool


def atiyah_determinant(config) -> AtiyahDeterminant:
    """Modulus of the determinant of the direction-polynomial matrix.

    Each inter-point direction lifts to a unit spinor, each point gets the
    polynomial whose roots are its n-1 directions, and the determinant of
    the coefficient matrix is taken.  The phase depends on the gauge chosen
    for the spinor lifts (the azimuth is undefined at the poles), so only
    the modulus is meaningful; the flag is a permanent reminder.
    """
    pts = config.points if isinstance(config, Configuration) else np.asarray(config, float)
    if len(pts) < 2:
        raise ValueError("atiyah determinant needs at least 2 points")
    return AtiyahDeterminant(float(np.exp(_atiyah_logabs(pts))), True)


def _spinors(v):
    """Unit spinors (u0, u1) for an (..., 3) array of unit vectors.

    Chart choice by hemisphere keeps both components well-conditioned;
    the resulting per-direction phase freedom never reaches |det|.
    """
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    north = z >= 0.0
    # entries outside a branch's hemisphere are discarded by the where();
    # the clip only keeps those unused lanes finite
    u0n = np.sqrt(np.clip((1.0 + z) / 2.0, 0.25, None))
    u1s = np.sqrt(np.clip((1.0 - z) / 2.0, 0.25, None))
    u0 = np.where(north, np.sqrt(np.clip((1.0 + z) / 2.0, 0.0, None)),
                  (x - 1j * y) / (2.0 * u1s))
    u1 = np.where(north, (x + 1j * y) / (2.0 * u0n), np.sqrt(np.clip((1.0 - z) / 2.0, 0.0, None)))
    return u0, u1


def _spinor_derivs(v):
    """d(u0)/dv and d(u1)/dv as complex (..., 3) arrays, matching _spinors."""
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    north = z >= 0.0
    # clip as in _spinors: each branch only reads its own hemisphere, where
    # the clip is inactive and the value exact
    u0n = np.sqrt(np.clip((1.0 + z) / 2.0, 0.25, None))
    u1s = np.sqrt(np.clip((1.0 - z) / 2.0, 0.25, None))
    shape = v.shape[:-1]
    du0 = np.zeros(shape + (3,), dtype=complex)
    du1 = np.zeros(shape + (3,), dtype=complex)
    # north chart: u0 = sqrt((1+z)/2), u1 = (x+iy)/(2 u0)
    du0[..., 2] = np.where(north, 1.0 / (4.0 * u0n), 0.0)
    du1[..., 0] = np.where(north, 1.0 / (2.0 * u0n), 0.0)
    du1[..., 1] = np.where(north, 1j / (2.0 * u0n), 0.0)
    du1[..., 2] = np.where(north, -(x + 1j * y) / (8.0 * u0n ** 3), 0.0)
    # south chart: u1 = sqrt((1-z)/2), u0 = (x-iy)/(2 u1)
    du1[..., 2] += np.where(north, 0.0, -1.0 / (4.0 * u1s))
    du0[..., 0] += np.where(north, 0.0, 1.0 / (2.0 * u1s))
    du0[..., 1] += np.where(north, 0.0, -1j / (2.0 * u1s))
    du0[..., 2] += np.where(north, 0.0, (x - 1j * y) / (8.0 * u1s ** 3))
    return du0, du1


def _pair_directions(x):
    n = len(x)
    diff = x[None, :, :] - x[:, None, :]  # diff[i, j] = x_j - x_i
    r = np.linalg.norm(diff, axis=2)
    off = ~np.eye(n, dtype=bool)
    if r[off].min() < COINCIDENCE_TOL:
        raise CoincidentPoints("pairwise distance below coincidence tolerance")
    rsafe = np.where(off, r, 1.0)
    return diff / rsafe[:, :, None], rsafe


def _factor_index(n):
    """J[i, m] = column of the m-th linear factor in row i (skips j = i)."""
    m = np.arange(n - 1)[None, :]
    i = np.arange(n)[:, None]
    return m + (m >= i)


def _atiyah_matrix(x):
    """Coefficient matrix d: row i holds p_i's coefficients by ascending power."""
    n = len(x)
    v, _ = _pair_directions(x)
    u0, u1 = _spinors(v)
    J = _factor_index(n)
    rows = np.arange(n)
    C = np.zeros((n, n), dtype=complex)
    C[:, 0] = 1.0
    for m in range(n - 1):
        a = -u1[rows, J[:, m]]
        b = u0[rows, J[:, m]]
        Cn = a[:, None] * C
        Cn[:, 1:] += b[:, None] * C[:, :-1]
        C = Cn
    return C


def _atiyah_logabs(x) -> float:
    d = _atiyah_matrix(np.asarray(x, dtype=float))
    sign, logabs = np.linalg.slogdet(d)
    if sign == 0:
        return -np.inf
    return float(logabs)


def _atiyah_gradient(x):
    """Gradient of -log|D| via d log det = tr(d^-1 dd)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    v, r = _pair_directions(x)
    u0, u1 = _spinors(v)
    du0, du1 = _spinor_derivs(v)
    J = _factor_index(n)
    rows = np.arange(n)

    # prefix/suffix products of each row's linear factors
    width = n
    P = np.zeros((n, n, width), dtype=complex)   # P[:, m] = prod of factors < m
    S = np.zeros((n, n, width), dtype=complex)   # S[:, m] = prod of factors >= m
    P[:, 0, 0] = 1.0
    S[:, n - 1, 0] = 1.0
    for m in range(n - 1):
        a = -u1[rows, J[:, m]][:, None]
        b = u0[rows, J[:, m]][:, None]
        P[:, m + 1, :] = a * P[:, m, :]
        P[:, m + 1, 1:] += b[:, 0:1] * P[:, m, :-1]
    for m in range(n - 2, -1, -1):
        a = -u1[rows, J[:, m]][:, None]
        b = u0[rows, J[:, m]][:, None]
        S[:, m, :] = a * S[:, m + 1, :]
        S[:, m, 1:] += b[:, 0:1] * S[:, m + 1, :-1]

    d = P[:, n - 1, :] * 1.0
    a_last = -u1[rows, J[:, n - 2]][:, None]
    b_last = u0[rows, J[:, n - 2]][:, None]
    d = a_last * P[:, n - 2, :]
    d[:, 1:] += b_last[:, 0:1] * P[:, n - 2, :-1]
    dinv = np.linalg.inv(d)
    qT = dinv.T  # qT[i, c] = (d^-1)[c, i]

    g = np.zeros((n, 3))
    for m in range(n - 1):
        j = J[:, m]
        # R = product of row factors except factor m, via prefix * suffix
        R = _batch_poly_mul(P[:, m, :m + 1], S[:, m + 1, :n - 1 - m])
        A = np.einsum("ic,ic->i", R, qT[:, :n - 1])
        B = np.einsum("ic,ic->i", R, qT[:, 1:n])
        dtr_dv = (-du1[rows, j] * A[:, None] + du0[rows, j] * B[:, None])  # (n, 3)
        vv = v[rows, j]
        rr = r[rows, j]
        radial = np.einsum("ab,ab->a", vv, dtr_dv.real) \
            + 1j * np.einsum("ab,ab->a", vv, dtr_dv.imag)
        dtr_dxj = (dtr_dv - vv * radial[:, None]) / rr[:, None]
        contrib = -np.real(dtr_dxj)  # gradient of -log|D| wrt x_j from factor (i, j)
        np.add.at(g, j, contrib)
        g[rows] -= contrib
    return g


def _batch_poly_mul(A, B):
    """Row-wise polynomial product of (n, ka) by (n, kb) -> (n, ka + kb - 1)."""
    n, ka = A.shape
    kb = B.shape[1]
    out = np.zeros((n, ka + kb - 1), dtype=complex)
    if ka <= kb:
        for t in range(ka):
            out[:, t:t + kb] += A[:, t:t + 1] * B
    else:
        for t in range(kb):
            out[:, t:t + ka] += B[:, t:t + 1] * A
    return out
