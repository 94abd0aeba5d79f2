"""Conforming triangular meshes with newest-vertex bisection.

Local edge ``i`` of a triangle is the edge opposite local vertex ``i``, i.e.
it joins ``tri[(i + 1) % 3]`` and ``tri[(i + 2) % 3]``.  Triangles are stored
counter-clockwise.  ``refedge[t]`` is the local index of the refinement edge,
so the newest vertex of ``t`` is ``triangles[t, refedge[t]]``.
"""

import numpy as np

DEGENERACY_TOL = 1e-14


class MeshError(ValueError):
    pass


class DegenerateTriangleError(MeshError):
    pass


class RefinementError(RuntimeError):
    pass


def _longest_edge_labels(vertices, triangles):
    p = vertices[triangles]
    lengths = np.stack(
        [np.linalg.norm(p[:, (i + 2) % 3] - p[:, (i + 1) % 3], axis=1) for i in range(3)],
        axis=1,
    )
    labels = np.empty(len(triangles), dtype=np.int64)
    for t in range(len(triangles)):
        cand = np.flatnonzero(lengths[t] >= lengths[t].max() * (1 - 1e-12))
        # tie: smallest opposite vertex id
        labels[t] = cand[np.argmin(triangles[t, cand])]
    return labels


class Mesh:
    """Immutable triangulation with cached topology and geometry.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counter-clockwise
    refedge : (nt,) local index of the refinement edge
    generation : (nt,) bisection depth from the initial mesh
    edges : (ne, 2) vertex pairs in ascending index order
    tri_edges : (nt, 3) global edge id of each local edge
    edge_tris : (ne, 2) adjacent triangles, ``-1`` in slot 1 for boundary edges
    edge_local : (ne, 2) local index of the edge inside each adjacent triangle
    boundary : (ne,) bool
    areas, diameters : (nt,)
    edge_lengths : (ne,)
    normals : (nt, 3, 2) outward unit normal of each local edge
    """

    def __init__(self, vertices, triangles, refedge=None, generation=None):
        self.vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(self.vertices)):
            raise MeshError("non-finite vertex coordinates")
        nt = len(self.triangles)
        if refedge is None:
            refedge = _longest_edge_labels(self.vertices, self.triangles)
        self.refedge = np.array(refedge, dtype=np.int64).reshape(nt)
        if generation is None:
            generation = np.zeros(nt, dtype=np.int64)
        self.generation = np.array(generation, dtype=np.int64).reshape(nt)
        if np.any((self.refedge < 0) | (self.refedge > 2)):
            raise MeshError("refinement edge index out of range")
        self._build_geometry()
        self._build_topology()
        for arr in (self.vertices, self.triangles, self.refedge, self.generation):
            arr.setflags(write=False)

    def _build_geometry(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        self.areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        # edge vectors, local edge i runs from vertex i+1 to vertex i+2
        ev = np.stack([p[:, (i + 2) % 3] - p[:, (i + 1) % 3] for i in range(3)], axis=1)
        lengths = np.linalg.norm(ev, axis=2)
        self.diameters = lengths.max(axis=1)
        bad = self.areas <= DEGENERACY_TOL * self.diameters**2
        if np.any(bad):
            t = int(np.flatnonzero(bad)[0])
            raise DegenerateTriangleError(
                f"triangle {t} is degenerate or clockwise (signed area {self.areas[t]:.3e})"
            )
        self.normals = np.stack([ev[..., 1], -ev[..., 0]], axis=2) / lengths[..., None]
        self.local_edge_lengths = lengths
        self.centroids = p.mean(axis=1)

    def _build_topology(self):
        nt = len(self.triangles)
        local = np.stack(
            [self.triangles[:, [(i + 1) % 3, (i + 2) % 3]] for i in range(3)], axis=1
        ).reshape(-1, 2)
        local = np.sort(local, axis=1)
        self.edges, inverse = np.unique(local, axis=0, return_inverse=True)
        self.tri_edges = inverse.reshape(nt, 3)
        ne = len(self.edges)
        counts = np.bincount(self.tri_edges.ravel(), minlength=ne)
        if np.any(counts > 2):
            raise MeshError("edge shared by more than two triangles")
        self.boundary = counts == 1
        self.edge_tris = -np.ones((ne, 2), dtype=np.int64)
        self.edge_local = -np.ones((ne, 2), dtype=np.int64)
        order = np.argsort(self.tri_edges.ravel(), kind="stable")
        flat_e = self.tri_edges.ravel()[order]
        slot = np.zeros(len(order), dtype=np.int64)
        slot[1:] = flat_e[1:] == flat_e[:-1]
        self.edge_tris[flat_e, slot] = order // 3
        self.edge_local[flat_e, slot] = order % 3
        pe = self.vertices[self.edges]
        self.edge_lengths = np.linalg.norm(pe[:, 1] - pe[:, 0], axis=1)
        self.edge_midpoints = pe.mean(axis=1)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def area(self):
        return float(self.areas.sum())

    def geometry(self, t):
        """Return ``(area, diameter, [(edge_length, outward_normal), ...])`` for triangle ``t``."""
        t = int(t)
        if not 0 <= t < self.n_triangles:
            raise IndexError(f"triangle id {t} out of range")
        edges = [(float(self.local_edge_lengths[t, i]), self.normals[t, i].copy()) for i in range(3)]
        return float(self.areas[t]), float(self.diameters[t]), edges

    def min_angles(self):
        p = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            c = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.arccos(np.clip(c, -1.0, 1.0)))
        return np.min(angles, axis=0)

    def hanging_vertices(self):
        """Vertices lying strictly inside an edge that has only one neighbour."""
        cand = np.flatnonzero(self.boundary)
        a = self.vertices[self.edges[cand, 0]]
        b = self.vertices[self.edges[cand, 1]]
        d = b - a
        x = self.vertices[None, :, :] - a[:, None, :]
        s = np.einsum("evk,ek->ev", x, d) / np.sum(d * d, axis=1)[:, None]
        cross = x[..., 0] * d[:, None, 1] - x[..., 1] * d[:, None, 0]
        tol = 1e-12 * self.edge_lengths[cand][:, None]
        on = (np.abs(cross) <= tol * np.linalg.norm(d, axis=1)[:, None]) & (s > 1e-12) & (s < 1 - 1e-12)
        return np.unique(np.nonzero(on)[1])

    def is_conforming(self):
        return self.hanging_vertices().size == 0

    def triangles_touching(self, point, tol=1e-12):
        v = np.flatnonzero(np.linalg.norm(self.vertices - np.asarray(point, float), axis=1) <= tol)
        return np.flatnonzero(np.isin(self.triangles, v).any(axis=1))


def build_initial(domain):
    """Initial mesh of ``"unit_square"`` or ``"lshape2d"`` with longest-edge labels."""
    if domain == "unit_square":
        vertices = [(0, 0), (1, 0), (1, 1), (0, 1)]
        triangles = [(0, 1, 2), (0, 2, 3)]
    elif domain == "lshape2d":
        # (-1,1)^2 minus (0,1)x(-1,0): three unit squares, each cut along a diagonal
        vertices = [(-1, -1), (0, -1), (-1, 0), (0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
        triangles = [(0, 1, 3), (0, 3, 2), (2, 3, 6), (2, 6, 5), (3, 4, 7), (3, 7, 6)]
    else:
        raise ValueError(f"unknown domain {domain!r}")
    return Mesh(vertices, triangles)


DOMAIN_AREA = {"unit_square": 1.0, "lshape2d": 3.0}


def bisect(mesh, marked):
    """Refine by newest-vertex bisection and return a new conforming mesh.

    Every triangle in ``marked`` is bisected across its refinement edge at
    least once.  Conformity is restored by propagating edge marks until each
    triangle with a marked edge also has its refinement edge marked; a
    triangle is then split into 2, 3 or 4 children.
    """
    marked = np.unique(np.fromiter((int(t) for t in marked), dtype=np.int64))
    if marked.size == 0:
        return mesh
    nt = mesh.n_triangles
    if marked[0] < 0 or marked[-1] >= nt:
        raise IndexError("marked triangle id out of range")

    ref = mesh.tri_edges[np.arange(nt), mesh.refedge]
    flag = np.zeros(mesh.n_edges, dtype=bool)
    flag[ref[marked]] = True
    cap = (int(mesh.generation.max()) + 2) * nt
    for _ in range(cap + 1):
        need = flag[mesh.tri_edges].any(axis=1) & ~flag[ref]
        if not need.any():
            break
        flag[ref[need]] = True
    else:
        raise RefinementError("closure did not terminate; refinement-edge labels are inconsistent")

    split = np.flatnonzero(flag)
    nv = mesh.n_vertices
    new_vertices = np.vstack([mesh.vertices, mesh.edge_midpoints[split]])
    mid = {tuple(mesh.edges[e]): nv + i for i, e in enumerate(split)}

    tris, refs, gens = [], [], []

    def emit(a, b, c, g):
        m = mid.get((b, c) if b < c else (c, b))
        if m is None:
            tris.append((a, b, c))
            refs.append(0)
            gens.append(g)
            return
        emit(m, a, b, g + 1)
        emit(m, c, a, g + 1)

    for t in range(nt):
        tri = mesh.triangles[t]
        r = int(mesh.refedge[t])
        if not flag[ref[t]]:
            tris.append(tuple(tri))
            refs.append(r)
            gens.append(int(mesh.generation[t]))
            continue
        a, b, c = (int(tri[(r + j) % 3]) for j in range(3))
        emit(a, b, c, int(mesh.generation[t]))

    return Mesh(new_vertices, tris, refs, gens)


def refine_uniform(mesh, times=1):
    for _ in range(times):
        mesh = bisect(mesh, range(mesh.n_triangles))
    return mesh


def write_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for (a, b, c), r, g in zip(mesh.triangles, mesh.refedge, mesh.generation):
            fh.write(f"{a} {b} {c} {r} {g}\n")


def read_mesh(path):
    with open(path) as fh:
        nv, nt = (int(s) for s in fh.readline().split())
        vertices = np.array([[float(s) for s in fh.readline().split()] for _ in range(nv)])
        rows = np.array([[int(s) for s in fh.readline().split()] for _ in range(nt)], dtype=np.int64)
    return Mesh(vertices, rows[:, :3], rows[:, 3], rows[:, 4])
