"""Point-group detection and naming in Schoenflies notation.

Candidate symmetry elements are generated geometrically (point directions,
pair midpoints and cross products, inertia eigenvectors, pair differences)
and accepted when they permute the point set within tolerance; the label is
then assigned by the standard decision tree.  The icosahedral groups are
written Y / Y_h, with I / I_h accepted as parsing aliases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InfiniteGroup
from .geometry import Configuration, Constraint

DEFAULT_TOL = 1e-4

_FINITE_ORDER = {
    "C": lambda k: k, "Cv": lambda k: 2 * k, "Ch": lambda k: 2 * k,
    "S": lambda k: k, "D": lambda k: 2 * k, "Dd": lambda k: 4 * k,
    "Dh": lambda k: 4 * k, "T": lambda k: 12, "Td": lambda k: 24,
    "Th": lambda k: 24, "O": lambda k: 24, "Oh": lambda k: 48,
    "Y": lambda k: 60, "Yh": lambda k: 120, "C1": lambda k: 1,
    "Ci": lambda k: 2, "C1h": lambda k: 2,
}


@dataclass(frozen=True)
class SchoenfliesLabel:
    """A point-group name: family plus the axis order k where applicable."""

    family: str
    k: int | None = None

    def __post_init__(self):
        if self.family in ("C", "Cv", "Ch", "S", "D", "Dd", "Dh"):
            if self.k is None or self.k < 2:
                raise ValueError(f"family {self.family} needs k >= 2")

    @property
    def text(self) -> str:
        f, k = self.family, self.k
        simple = {"T": "T", "Td": "T_d", "Th": "T_h", "O": "O", "Oh": "O_h",
                  "Y": "Y", "Yh": "Y_h", "C1": "C_1", "Ci": "C_i",
                  "C1h": "C_1h", "Dinfh": "D_∞h", "Cinfv": "C_∞v"}
        if f in simple:
            return simple[f]
        stem = {"C": f"C_{k}", "Cv": f"C_{k}v", "Ch": f"C_{k}h", "S": f"S_{k}",
                "D": f"D_{k}", "Dd": f"D_{k}d", "Dh": f"D_{k}h"}
        return stem[f]

    def __str__(self):
        return self.text

    @classmethod
    def parse(cls, text: str) -> "SchoenfliesLabel":
        t = text.strip().replace("inf", "∞")
        aliases = {"I": "Y", "I_h": "Y_h", "C_s": "C_1h", "K": "Y_h"}
        t = aliases.get(t, t)
        simple = {"T": ("T", None), "T_d": ("Td", None), "T_h": ("Th", None),
                  "O": ("O", None), "O_h": ("Oh", None), "Y": ("Y", None),
                  "Y_h": ("Yh", None), "C_1": ("C1", None), "C_i": ("Ci", None),
                  "C_1h": ("C1h", None), "D_∞h": ("Dinfh", None),
                  "C_∞v": ("Cinfv", None)}
        if t in simple:
            return cls(*simple[t])
        head, _, rest = t.partition("_")
        num = rest.rstrip("vhd")
        suffix = rest[len(num):]
        fam = {"C": {"": "C", "v": "Cv", "h": "Ch"},
               "D": {"": "D", "d": "Dd", "h": "Dh"},
               "S": {"": "S"}}[head][suffix]
        return cls(fam, int(num))

    @property
    def order(self) -> int:
        if self.family in ("Dinfh", "Cinfv"):
            raise InfiniteGroup(f"{self.text} is a continuous group")
        return _FINITE_ORDER[self.family](self.k)


@dataclass(frozen=True)
class SymmetryElement:
    kind: str          # "rotation" | "mirror" | "improper" | "inversion"
    order: int
    vector: tuple      # rotation/improper axis, or mirror plane normal

    def matrix(self) -> np.ndarray:
        v = np.array(self.vector)
        if self.kind == "rotation":
            return _rotation(v, 2.0 * math.pi / self.order)
        if self.kind == "mirror":
            return _reflection(v)
        if self.kind == "improper":
            return _reflection(v) @ _rotation(v, 2.0 * math.pi / self.order)
        return -np.eye(3)


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of point-group detection on one configuration."""

    label: SchoenfliesLabel
    rotation_order: int
    elements: tuple
    tol: float
    unstable: bool = False
    strict_label: SchoenfliesLabel | None = None

    def to_dict(self) -> dict:
        d = {
            "label": self.label.text,
            "rotation_order": self.rotation_order,
            "tolerance": self.tol,
            "unstable": self.unstable,
            "elements": [
                {"kind": e.kind, "order": e.order, "vector": [float(c) for c in e.vector]}
                for e in self.elements
            ],
        }
        if self.unstable and self.strict_label is not None:
            d["strict_label"] = self.strict_label.text
        return d


def _rotation(axis, angle):
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def _reflection(normal):
    nv = np.asarray(normal, dtype=float)
    nv = nv / np.linalg.norm(nv)
    return np.eye(3) - 2.0 * np.outer(nv, nv)


def _maps_onto_itself(X, M, tol):
    Y = X @ M.T
    return cdist(Y, X).min(axis=1).max() < tol


def _canonical_sign(v, eps=1e-8):
    for c in v:
        if abs(c) > eps:
            return v if c > 0 else -v
    return v


def _dedupe_directions(vectors, decimals=4):
    out = []
    seen = set()
    for v in vectors:
        nrm = np.linalg.norm(v)
        if nrm < 1e-9:
            continue
        u = _canonical_sign(v / nrm)
        key = tuple(np.round(u, decimals) + 0.0)
        if key not in seen:
            seen.add(key)
            out.append(u)
    return out


def _candidate_directions(X):
    n = len(X)
    cands = [np.eye(3)[i] for i in range(3)]
    evals, evecs = np.linalg.eigh(_inertia(X))
    cands.extend(evecs.T)
    cands.extend(X)
    iu, ju = np.triu_indices(n, 1)
    cands.extend(X[iu] + X[ju])
    cands.extend(np.cross(X[iu], X[ju]))
    return _dedupe_directions(cands)


def _mirror_candidates(X, axis_cands):
    n = len(X)
    iu, ju = np.triu_indices(n, 1)
    return _dedupe_directions(list(axis_cands) + list(X[iu] - X[ju]))


def _inertia(X):
    r2 = np.sum(X * X, axis=1).sum()
    return r2 * np.eye(3) - X.T @ X


def _cluster_sizes(values, gap):
    order = np.sort(values)
    sizes = []
    count = 1
    for prev, cur in zip(order, order[1:]):
        if cur - prev > gap:
            sizes.append(count)
            count = 0
        count += 1
    sizes.append(count)
    return sizes


def _ring_gcd(X, axis, tol):
    """gcd of the off-axis ring sizes; any true C_k order divides it."""
    z = X @ axis
    rho = np.linalg.norm(X - z[:, None] * axis[None, :], axis=1)
    off = rho > 10.0 * tol
    if not np.any(off):
        return 0
    gap = max(50.0 * tol, 1e-2)
    g = 0
    zo, ro = z[off], rho[off]
    zs = np.sort(zo)
    # two-level clustering: bands in z, then rings by radius within each band
    band_edges = [0] + [i + 1 for i in range(len(zs) - 1) if zs[i + 1] - zs[i] > gap] + [len(zs)]
    order = np.argsort(zo)
    for lo, hi in zip(band_edges, band_edges[1:]):
        members = order[lo:hi]
        for size in _cluster_sizes(ro[members], gap):
            g = math.gcd(g, size)
    return g


def _divisors_desc(g):
    return [k for k in range(g, 1, -1) if g % k == 0]


def _proper_axes(X, tol, cands):
    found = []
    seen = set()

    def probe(axis):
        key = tuple(np.round(_canonical_sign(axis), 4) + 0.0)
        if key in seen:
            return
        seen.add(key)
        g = _ring_gcd(X, axis, tol)
        for k in _divisors_desc(g):
            if _maps_onto_itself(X, _rotation(axis, 2.0 * math.pi / k), tol):
                found.append((axis, k))
                break

    for axis in cands:
        probe(axis)
    # Axes through face centers (e.g. the C_5s of a dodecahedron) need not pass
    # through any point or pair: harvest them by composing found rotations
    # until no new axis appears.
    while True:
        mats = [_rotation(a, 2.0 * math.pi / k) for a, k in found]
        fresh = []
        for A in mats:
            for B in mats:
                M = A @ B
                cosang = (np.trace(M) - 1.0) / 2.0
                if cosang > 1.0 - 1e-9:
                    continue
                w = np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])
                if np.linalg.norm(w) < 1e-9:  # a half turn; axis from M + I
                    w = (M + np.eye(3))[:, np.argmax(np.diag(M + np.eye(3)))]
                fresh.append(w / np.linalg.norm(w))
        before = len(found)
        for axis in _dedupe_directions(fresh):
            probe(axis)
        if len(found) == before:
            break
    return _merge_parallel_axes(found)


def _merge_parallel_axes(found, cos_tol=0.99995):
    """Collapse near-duplicate axis directions (noisy candidates for the same
    physical axis), keeping the highest detected order."""
    kept = []
    for axis, k in found:
        for idx, (a, korder) in enumerate(kept):
            if abs(float(np.dot(a, axis))) > cos_tol:
                if k > korder:
                    kept[idx] = (axis, k)
                break
        else:
            kept.append((axis, k))
    return kept


def _collinear(X, tol):
    norms = np.linalg.norm(X, axis=1)
    u = X[np.argmax(norms)]
    if np.linalg.norm(u) < tol:
        return None
    u = u / np.linalg.norm(u)
    res = np.linalg.norm(np.cross(X, u), axis=1)
    return u if res.max() < tol else None


_PARALLEL = 1.0 - 1e-5
_PERP = 3e-3


def _classify(X, tol):
    n = len(X)
    line = _collinear(X, tol)
    if line is not None:
        elements = [SymmetryElement("rotation", 0, tuple(line))]
        if _maps_onto_itself(X, -np.eye(3), tol):
            return SchoenfliesLabel("Dinfh"), 0, tuple(elements)
        return SchoenfliesLabel("Cinfv"), 0, tuple(elements)

    cands = _candidate_directions(X)
    axes = _proper_axes(X, tol, cands)
    mirrors = [nv for nv in _mirror_candidates(X, cands)
               if _maps_onto_itself(X, _reflection(nv), tol)]
    mirrors = [a for a, _k in _merge_parallel_axes([(nv, 2) for nv in mirrors])]
    has_inversion = _maps_onto_itself(X, -np.eye(3), tol)
    impropers = []
    for axis, k in axes:
        for m in dict.fromkeys((2 * k, k)):
            if m >= 3 and _maps_onto_itself(
                    X, _reflection(axis) @ _rotation(axis, 2.0 * math.pi / m), tol):
                impropers.append((axis, m))
                break

    elements = [SymmetryElement("rotation", k, tuple(a)) for a, k in axes]
    elements += [SymmetryElement("mirror", 2, tuple(nv)) for nv in mirrors]
    elements += [SymmetryElement("improper", m, tuple(a)) for a, m in impropers]
    if has_inversion:
        elements.append(SymmetryElement("inversion", 2, (0.0, 0.0, 0.0)))
    elements = tuple(elements)

    if not axes:
        if mirrors:
            return SchoenfliesLabel("C1h"), 1, elements
        if has_inversion:
            return SchoenfliesLabel("Ci"), 1, elements
        return SchoenfliesLabel("C1"), 1, elements

    kmax = max(k for _, k in axes)
    high = [(a, k) for a, k in axes if k >= 3]
    if len(high) >= 2:
        if any(k >= 5 for _, k in high):
            fam = "Yh" if has_inversion else "Y"
        elif any(k == 4 for _, k in high):
            fam = "Oh" if has_inversion else "O"
        elif has_inversion:
            fam = "Th"
        elif mirrors:
            fam = "Td"
        else:
            fam = "T"
        return SchoenfliesLabel(fam), kmax, elements

    best = None
    for main, k in [(a, k) for a, k in axes if k == kmax]:
        perp_c2 = sum(1 for a, kk in axes if kk >= 2 and abs(np.dot(a, main)) < _PERP)
        sigma_h = any(abs(np.dot(nv, main)) > _PARALLEL for nv in mirrors)
        sigma_v = sum(1 for nv in mirrors if abs(np.dot(nv, main)) < _PERP)
        s2k = any(abs(np.dot(a, main)) > _PARALLEL and m == 2 * k for a, m in impropers)
        if perp_c2 >= k:
            if sigma_h:
                label = SchoenfliesLabel("Dh", k)
            elif sigma_v >= k:
                label = SchoenfliesLabel("Dd", k)
            else:
                label = SchoenfliesLabel("D", k)
        else:
            if sigma_h:
                label = SchoenfliesLabel("Ch", k)
            elif sigma_v >= 1:
                label = SchoenfliesLabel("Cv", k)
            elif s2k:
                label = SchoenfliesLabel("S", 2 * k)
            else:
                label = SchoenfliesLabel("C", k)
        if best is None or (label.order, label.text) > (best.order, best.text):
            best = label
    return best, kmax, elements


def detect_point_group(config, tol: float = DEFAULT_TOL) -> SymmetryReport:
    """Schoenflies point group of a configuration.

    Points are centered and RMS-normalized first, so ``tol`` is a relative
    displacement.  Detection runs at ``tol`` and ``tol/10``; differing labels
    mark the report unstable (near-symmetric impostor) rather than raising.
    """
    pts = config.points if isinstance(config, Configuration) else np.asarray(config, float)
    if len(pts) < 2:
        raise ValueError("point-group detection needs at least 2 points")
    X = pts - pts.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum(X * X, axis=1)))
    if rms > 0:
        X = X / rms
    label, order, elements = _classify(X, tol)
    strict, _, _ = _classify(X, tol / 10.0)
    return SymmetryReport(
        label=label,
        rotation_order=order,
        elements=elements,
        tol=tol,
        unstable=label.text != strict.text,
        strict_label=strict,
    )


# --- group order by explicit closure of generator matrices -----------------

def _generators(label: SchoenfliesLabel):
    f, k = label.family, label.k
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    z = np.array([0.0, 0.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    diag = np.array([1.0, 1.0, 1.0])
    sigma_h = _reflection(z)
    sigma_v = _reflection(np.array([0.0, 1.0, 0.0]))  # the xz-plane
    inv = -np.eye(3)
    if f == "C1":
        return []
    if f == "Ci":
        return [inv]
    if f == "C1h":
        return [sigma_h]
    if f == "C":
        return [_rotation(z, 2 * math.pi / k)]
    if f == "Cv":
        return [_rotation(z, 2 * math.pi / k), sigma_v]
    if f == "Ch":
        return [_rotation(z, 2 * math.pi / k), sigma_h]
    if f == "S":
        return [sigma_h @ _rotation(z, 2 * math.pi / k)]
    if f == "D":
        return [_rotation(z, 2 * math.pi / k), _rotation(x, math.pi)]
    if f == "Dh":
        return [_rotation(z, 2 * math.pi / k), _rotation(x, math.pi), sigma_h]
    if f == "Dd":
        alpha = math.pi / (2 * k)
        nrm = np.array([-math.sin(alpha), math.cos(alpha), 0.0])
        return [_rotation(z, 2 * math.pi / k), _rotation(x, math.pi), _reflection(nrm)]
    if f in ("T", "Td", "Th"):
        gens = [_rotation(z, math.pi), _rotation(diag, 2 * math.pi / 3)]
        if f == "Td":
            gens.append(_reflection(np.array([1.0, -1.0, 0.0])))
        if f == "Th":
            gens.append(inv)
        return gens
    if f in ("O", "Oh"):
        gens = [_rotation(z, math.pi / 2), _rotation(diag, 2 * math.pi / 3)]
        if f == "Oh":
            gens.append(inv)
        return gens
    if f in ("Y", "Yh"):
        five = np.array([0.0, 1.0, phi])
        gens = [_rotation(z, math.pi), _rotation(five, 2 * math.pi / 5)]
        if f == "Yh":
            gens.append(inv)
        return gens
    raise InfiniteGroup(f"{label.text} is a continuous group")


@lru_cache(maxsize=None)
def _closure_order(text: str) -> int:
    label = SchoenfliesLabel.parse(text)
    gens = _generators(label)
    elems = {_matrix_key(np.eye(3)): np.eye(3)}
    frontier = [np.eye(3)]
    while frontier:
        nxt = []
        for m in frontier:
            for gmat in gens:
                prod = gmat @ m
                key = _matrix_key(prod)
                if key not in elems:
                    if len(elems) >= 1000:
                        raise RuntimeError("group closure did not terminate")
                    elems[key] = prod
                    nxt.append(prod)
        frontier = nxt
    return len(elems)


def _matrix_key(m):
    return tuple(np.round(m, 6).ravel() + 0.0)


def group_order(label) -> int:
    """Order of the group, by closing its generator matrices under products."""
    if isinstance(label, str):
        label = SchoenfliesLabel.parse(label)
    if label.family in ("Dinfh", "Cinfv"):
        raise InfiniteGroup(f"{label.text} is a continuous group")
    return _closure_order(label.text)


# --- principal-axis alignment ----------------------------------------------

def _quartic_score(X, d):
    return float(np.sum((X @ d) ** 4))


def _refine_in_subspace(X, basis):
    """Pick the direction in the (degenerate) eigenspace maximizing the
    fourth moment of projections; ties break to the lexicographically
    largest sign-fixed direction, which keeps repeated alignment stable."""
    P = basis @ basis.T
    raw = _candidate_directions(X)
    cands = []
    for v in raw:
        w = P @ v
        if np.linalg.norm(w) > 1e-6:
            cands.append(_canonical_sign(w / np.linalg.norm(w)))
    scores = np.array([_quartic_score(X, d) for d in cands])
    thresh = scores.max() - 1e-9 * max(1.0, abs(scores.max()))
    tied = [tuple(np.round(d, 9) + 0.0) for d in cands]
    best_idx = max((idx for idx in range(len(cands)) if scores[idx] >= thresh),
                   key=lambda idx: tied[idx])
    return cands[best_idx]


def canonical_pose(points: np.ndarray) -> np.ndarray:
    """Centered points in the deterministic principal-axis frame."""
    X = np.asarray(points, dtype=float)
    X = X - X.mean(axis=0)
    evals, evecs = np.linalg.eigh(_inertia(X))
    scale = max(abs(evals[-1]), 1.0)
    groups = []
    start = 0
    for i in range(1, 4):
        if i == 3 or evals[i] - evals[start] > 1e-7 * scale:
            groups.append(list(range(start, i)))
            start = i
    axes = [None, None, None]
    for grp in groups:
        if len(grp) == 1:
            axes[grp[0]] = evecs[:, grp[0]]
        else:
            basis = evecs[:, grp]
            for slot_pos, slot in enumerate(grp):
                d = _refine_in_subspace(X, basis)
                axes[slot] = d
                if slot_pos < len(grp) - 1:
                    # orthonormal basis of the part of the eigenspace
                    # perpendicular to the axes chosen so far
                    residual = basis - np.outer(d, d @ basis)
                    u, s, _vt = np.linalg.svd(residual, full_matrices=False)
                    basis = u[:, s > 1e-8]
    R = np.array([_canonical_sign(a) for a in axes])
    return X @ R.T


def align_principal(config: Configuration) -> Configuration:
    """Deterministically align a configuration to its principal axes."""
    new_pts = canonical_pose(config.points)
    if config.constraint in (Constraint.PLANE, Constraint.DISK):
        new_pts = new_pts.copy()
        new_pts[:, 2] = 0.0
    return Configuration(new_pts, config.constraint)
