"""Point configurations, convex-hull polyhedra and reference generators.

Coordinates are plain ``(n, 3)`` float arrays throughout; a "point" is a
length-3 array.  Configurations carry a constraint tag, polyhedra carry
vertices plus cyclically ordered faces with a consistent outward
orientation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from .errors import DegenerateHull, DuplicatePoints

COINCIDENCE_TOL = 1e-12
SPHERE_TOL = 1e-12
DISK_TOL = 1e-12
FACE_MERGE_ANGLE = 1e-6  # rad; adjacent hull triangles closer than this are coplanar
CENTER_SHELL_TOL = 1e-6  # radius below which a point counts as sitting at the centroid

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class Constraint(Enum):
    """Where the points of a configuration are allowed to live."""

    SPHERE = "sphere"  # |x| = 1
    FREE = "free"      # anywhere in 3-space
    PLANE = "plane"    # z = 0
    DISK = "disk"      # z = 0 and |x| <= 1

    @classmethod
    def parse(cls, name):
        aliases = {"unitsphere": "sphere", "unitdisk": "disk"}
        key = str(name).strip().lower()
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class Configuration:
    """An ordered set of labeled points plus the constraint they satisfy."""

    points: np.ndarray
    constraint: Constraint = Constraint.FREE

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite coordinates")
        if len(pts) >= 2 and pdist(pts).min() <= 0.0:
            raise DuplicatePoints("configuration contains coincident points")
        if self.constraint is Constraint.SPHERE:
            radii = np.linalg.norm(pts, axis=1)
            if np.abs(radii - 1.0).max() > SPHERE_TOL:
                raise ValueError("sphere constraint violated: |x| != 1")
        elif self.constraint in (Constraint.PLANE, Constraint.DISK):
            if np.any(pts[:, 2] != 0.0):
                raise ValueError("plane constraint violated: z != 0")
            if self.constraint is Constraint.DISK:
                if np.linalg.norm(pts, axis=1).max() > 1.0 + DISK_TOL:
                    raise ValueError("disk constraint violated: |x| > 1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def n(self):
        return len(self.points)

    def to_json(self) -> str:
        """Serialize as ``{"constraint": str, "points": [[x,y,z], ...]}``."""
        payload = {
            "constraint": self.constraint.value,
            "points": [[float(c) for c in p] for p in self.points],
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        payload = json.loads(text)
        return cls(np.array(payload["points"], dtype=float),
                   Constraint.parse(payload["constraint"]))


@dataclass(frozen=True)
class Polyhedron:
    """Vertices plus cyclic faces; edges are derived from the faces."""

    vertices: np.ndarray
    faces: tuple

    def __post_init__(self):
        verts = np.array(self.vertices, dtype=float)
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "faces", tuple(tuple(int(i) for i in f) for f in self.faces))

    @cached_property
    def edges(self) -> frozenset:
        out = set()
        for face in self.faces:
            for a, b in zip(face, face[1:] + face[:1]):
                out.add((a, b) if a < b else (b, a))
        return frozenset(out)

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_faces(self):
        return len(self.faces)

    @property
    def num_edges(self):
        return len(self.edges)

    def face_sizes(self):
        """Census of face sizes, e.g. {5: 12, 6: 20}."""
        census = {}
        for f in self.faces:
            census[len(f)] = census.get(len(f), 0) + 1
        return census

    def vertex_degrees(self):
        deg = np.zeros(len(self.vertices), dtype=int)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def to_off(self) -> str:
        lines = ["OFF", f"{self.num_vertices} {self.num_faces} {self.num_edges}"]
        for v in self.vertices:
            lines.append(" ".join(repr(float(c)) for c in v))
        for f in self.faces:
            lines.append(" ".join([str(len(f))] + [str(i) for i in f]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_off(cls, text: str) -> "Polyhedron":
        tokens = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
        if not tokens or tokens[0] != "OFF":
            raise ValueError("not an OFF file")
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4  # skip the edge count
        coords = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            faces.append(tuple(int(t) for t in tokens[pos + 1:pos + 1 + k]))
            pos += 1 + k
        return cls(coords, tuple(faces))


def _as_points(config) -> np.ndarray:
    if isinstance(config, Configuration):
        return np.asarray(config.points, dtype=float)
    return np.asarray(config, dtype=float)


def _oriented_simplices(points, hull):
    """Hull triangles, each wound counterclockwise as seen from outside."""
    simplices = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        a, b, c = simplex
        normal = np.cross(points[b] - points[a], points[c] - points[a])
        if np.dot(normal, eq[:3]) < 0.0:
            simplex = np.array([a, c, b])
        simplices.append(simplex)
    return np.array(simplices)


def convex_hull(config) -> Polyhedron:
    """Boundary complex of the convex hull of a configuration.

    Adjacent coplanar triangles (dihedral angle below ``FACE_MERGE_ANGLE``)
    are merged into a single polygonal face, so a cube comes out with 6
    squares rather than 12 triangles.
    """
    points = _as_points(config)
    if len(points) < 4:
        raise DegenerateHull(f"need at least 4 points, got {len(points)}")
    if pdist(points).min() < COINCIDENCE_TOL:
        raise DuplicatePoints("two hull input points coincide")
    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise DegenerateHull("points are coplanar or collinear") from exc

    simplices = _oriented_simplices(points, hull)
    normals = hull.equations[:, :3]
    cos_merge = math.cos(FACE_MERGE_ANGLE)

    # union-find over triangles sharing a near-zero dihedral angle
    parent = list(range(len(simplices)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for s, nbrs in enumerate(hull.neighbors):
        for t in nbrs:
            if np.dot(normals[s], normals[t]) >= cos_merge:
                parent[find(s)] = find(t)

    groups = {}
    for s in range(len(simplices)):
        groups.setdefault(find(s), []).append(s)

    faces = []
    for members in groups.values():
        # boundary of the merged patch: directed edges used exactly once
        succ = {}
        for s in members:
            a, b, c = simplices[s]
            for u, v in ((a, b), (b, c), (c, a)):
                if (v, u) in succ:
                    del succ[(v, u)]
                else:
                    succ[(u, v)] = None
        nxt = {u: v for u, v in succ}
        start = min(nxt)
        cycle = [start]
        while True:
            w = nxt[cycle[-1]]
            if w == start:
                break
            cycle.append(w)
        faces.append(tuple(cycle))

    # keep only hull vertices, renumbered in qhull's vertex order
    remap = {int(old): new for new, old in enumerate(hull.vertices)}
    vertices = points[hull.vertices]
    faces = tuple(tuple(remap[i] for i in f) for f in faces)
    poly = Polyhedron(vertices, faces)

    counts = {}
    for e in _face_edge_list(poly):
        counts[e] = counts.get(e, 0) + 1
    if any(c != 2 for c in counts.values()):
        raise DegenerateHull("hull faces do not close up; input is nearly degenerate")
    return poly


def _face_edge_list(poly):
    out = []
    for face in poly.faces:
        for a, b in zip(face, face[1:] + face[:1]):
            out.append((a, b) if a < b else (b, a))
    return out


def check_euler(poly: Polyhedron) -> bool:
    """True iff V + F - E = 2."""
    return poly.num_vertices + poly.num_faces - poly.num_edges == 2


def _directed_face_maps(poly):
    """For each directed edge (u, v): the face using it, and the vertex after v."""
    face_of = {}
    after = {}
    for fi, face in enumerate(poly.faces):
        k = len(face)
        for t in range(k):
            u, v, w = face[t], face[(t + 1) % k], face[(t + 2) % k]
            face_of[(u, v)] = fi
            after[(u, v)] = w
    return face_of, after


def _vertex_rotations(poly):
    """Cyclic neighbor order around every vertex, consistently oriented."""
    _, after = _directed_face_maps(poly)
    # successor of neighbor w around v: the vertex after v in the face with (w -> v)
    succ = {}
    for (u, v), w in after.items():
        succ.setdefault(v, {})[u] = w
    rotations = []
    for v in range(poly.num_vertices):
        ring_map = succ[v]
        start = next(iter(ring_map))
        ring = [start]
        while True:
            w = ring_map[ring[-1]]
            if w == start:
                break
            ring.append(w)
        if len(ring) != len(ring_map):
            raise ValueError("vertex link is not a single cycle")
        rotations.append(ring)
    return rotations


def dual(poly: Polyhedron) -> Polyhedron:
    """Dual polyhedron: vertices at face centroids, faces around old vertices."""
    face_of, after = _directed_face_maps(poly)
    centroids = np.array([poly.vertices[list(f)].mean(axis=0) for f in poly.faces])
    rotations = _vertex_rotations(poly)
    dual_faces = []
    for v, ring in enumerate(rotations):
        dual_faces.append(tuple(face_of[(v, w)] for w in ring))
    out = Polyhedron(centroids, tuple(dual_faces))
    return _orient_outward(out)


def _orient_outward(poly: Polyhedron) -> Polyhedron:
    center = poly.vertices.mean(axis=0)
    fixed = []
    for face in poly.faces:
        pts = poly.vertices[list(face)]
        normal = np.zeros(3)
        for a, b in zip(pts, np.roll(pts, -1, axis=0)):  # Newell's formula
            normal += np.cross(a, b)
        if np.dot(normal, pts.mean(axis=0) - center) < 0.0:
            face = face[::-1]
        fixed.append(tuple(face))
    return Polyhedron(poly.vertices, tuple(fixed))


def _refine_start_candidates(rotations, poly):
    """Vertices of the smallest iteratively-refined invariant class."""
    nv = len(rotations)
    sizes_at = [tuple(sorted(len(f) for f in poly.faces if v in f)) for v in range(nv)]
    colors = [(len(rotations[v]), sizes_at[v]) for v in range(nv)]
    ranks = _rank(colors)
    while True:
        refined = [(ranks[v], tuple(sorted(ranks[w] for w in rotations[v]))) for v in range(nv)]
        new_ranks = _rank(refined)
        if len(set(new_ranks)) == len(set(ranks)):
            break
        ranks = new_ranks
    by_class = {}
    for v, r in enumerate(ranks):
        by_class.setdefault(r, []).append(v)
    best = min(by_class.values(), key=lambda vs: (len(vs), ranks[vs[0]]))
    return best


def _rank(keys):
    ordered = sorted(set(keys))
    lut = {k: i for i, k in enumerate(ordered)}
    return [lut[k] for k in keys]


def _trace_code(rotations, start, i0, sense):
    labels = {start: 0}
    entry = {start: rotations[start][i0]}
    order = [start]
    code = []
    qi = 0
    while qi < len(order):
        v = order[qi]
        qi += 1
        ring = rotations[v]
        k = ring.index(entry[v])
        deg = len(ring)
        for t in range(deg):
            w = ring[(k + sense * t) % deg]
            if w not in labels:
                labels[w] = len(order)
                order.append(w)
                entry[w] = v
            code.append(labels[w])
        code.append(-1)
    return tuple(code)


def combinatorial_signature(poly: Polyhedron) -> bytes:
    """Relabeling-invariant canonical form of the polyhedron's face lattice.

    Minimum-lexicographic traversal code of the oriented combinatorial map,
    taken over all starting flags and both orientations, so mirror images
    and arbitrary vertex relabelings collapse to the same signature.
    """
    rotations = _vertex_rotations(poly)
    starts = _refine_start_candidates(rotations, poly)
    best = None
    for v in starts:
        for i0 in range(len(rotations[v])):
            for sense in (1, -1):
                code = _trace_code(rotations, v, i0, sense)
                if best is None or code < best:
                    best = code
    sizes = sorted(poly.face_sizes().items())
    header = (poly.num_vertices, poly.num_edges, poly.num_faces) + tuple(
        x for pair in sizes for x in pair)
    return np.array(header + best, dtype=np.int32).tobytes()


@dataclass(frozen=True)
class ShellDecomposition:
    """Concentric radius bands of a configuration, innermost first."""

    shells: tuple        # ((mean_radius, (point indices, ...)), ...)
    gap_ratio: float

    @property
    def sizes(self):
        return tuple(len(members) for _, members in self.shells)


def shell_decomposition(config, gap_ratio: float = 1.2) -> ShellDecomposition:
    """Split points into radial shells around the centroid.

    A new shell starts wherever consecutive sorted radii jump by more than
    ``gap_ratio``; points within ``CENTER_SHELL_TOL`` of the centroid form
    their own innermost shell.
    """
    if gap_ratio <= 1.0:
        raise ValueError("gap_ratio must exceed 1")
    points = _as_points(config)
    radii = np.linalg.norm(points - points.mean(axis=0), axis=1)
    order = np.argsort(radii, kind="stable")
    shells = []
    current = []
    for idx in order:
        r = radii[idx]
        if r <= CENTER_SHELL_TOL:
            if shells and shells[0][0] == "center":
                shells[0][1].append(idx)
            else:
                shells.insert(0, ["center", [idx]])
            continue
        if current and r / radii[current[-1]] > gap_ratio:
            shells.append(["band", current])
            current = []
        current.append(idx)
    if current:
        shells.append(["band", current])
    packed = tuple(
        (float(np.mean([radii[i] for i in members])), tuple(int(i) for i in members))
        for _, members in shells)
    return ShellDecomposition(packed, gap_ratio)


PLATONIC_KINDS = ("tetrahedron", "octahedron", "cube", "icosahedron", "dodecahedron")


def _platonic_vertices(kind):
    phi = GOLDEN
    if kind == "tetrahedron":
        return np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    if kind == "octahedron":
        return np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0],
                         [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)
    if kind == "cube":
        return np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)],
                        dtype=float)
    if kind == "icosahedron":
        verts = []
        for a in (-1.0, 1.0):
            for b in (-phi, phi):
                verts += [[0, a, b], [a, b, 0], [b, 0, a]]
        return np.array(verts)
    if kind == "dodecahedron":
        verts = [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
        for a in (-1 / phi, 1 / phi):
            for b in (-phi, phi):
                verts += [[0, a, b], [a, b, 0], [b, 0, a]]
        return np.array(verts, dtype=float)
    raise ValueError(f"unknown Platonic solid {kind!r}; expected one of {PLATONIC_KINDS}")


def platonic(kind: str) -> Configuration:
    """Vertices of a Platonic solid inscribed in the unit sphere."""
    verts = _platonic_vertices(kind)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    return Configuration(verts, Constraint.SPHERE)


def mackay_icosahedron(shell_count: int) -> Configuration:
    """Center point plus icosahedrally packed shells, 10*s^2 + 2 sites each.

    Nearest-neighbor spacing is normalized to 1; complete clusters have
    1, 13, 55, 147, ... points.
    """
    if shell_count < 0:
        raise ValueError("shell_count must be >= 0")
    base = _platonic_vertices("icosahedron") / 2.0  # unit edge length
    hull = convex_hull(base) if shell_count > 0 else None
    pts = [np.zeros(3)]
    seen = {(0, 0, 0)}
    for s in range(1, shell_count + 1):
        for face in hull.faces:
            va, vb, vc = (base[i] for i in face)
            for i in range(s + 1):
                for j in range(s + 1 - i):
                    k = s - i - j
                    p = i * va + j * vb + k * vc
                    key = tuple(np.round(p, 9))
                    if key not in seen:
                        seen.add(key)
                        pts.append(p)
    pts = np.array(pts)
    if len(pts) > 1:
        pts = pts / pdist(pts).min()
    return Configuration(pts, Constraint.FREE)


def truncated_icosahedron() -> Polyhedron:
    """The 60-vertex fullerene polyhedron: 12 pentagons and 20 hexagons."""
    phi = GOLDEN
    seeds = [(0.0, 1.0, 3.0 * phi),
             (1.0, 2.0 + phi, 2.0 * phi),
             (phi, 2.0, 2.0 * phi + 1.0)]
    verts = set()
    for seed in seeds:
        for sx in (-1, 1):
            for sy in (-1, 1):
                for sz in (-1, 1):
                    v = (sx * seed[0], sy * seed[1], sz * seed[2])
                    for shift in range(3):
                        verts.add((v[shift], v[(shift + 1) % 3], v[(shift + 2) % 3]))
    return convex_hull(np.array(sorted(verts)))
