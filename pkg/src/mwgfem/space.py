"""Weak Galerkin spaces: quadrature, local bases, DOF layout and L2 projections.

Interior unknowns on a triangle are ``[P_k]^2`` in centroid-centred monomials,
ordered component-major: ``(1, dx, dy)`` for u_x then for u_y when ``k = 1``.
Edge unknowns for ``k = 1`` span constants plus the rigid-rotation trace
``(-(y - ym), x - xm)`` about the edge midpoint.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

TRI_DEGREE = 6
EDGE_DEGREE = 7
MAX_DEGREE = 30


@dataclass(frozen=True)
class QuadratureRule:
    """Points are barycentric ``(n, 3)`` on triangles, parametric ``(n,)`` on [0, 1] for edges."""

    kind: str
    degree: int
    points: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=None)
def quadrature(kind, degree):
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"unsupported quadrature degree {degree} (max {MAX_DEGREE})")
    if kind == "edge":
        n = degree // 2 + 1
        s, w = np.polynomial.legendre.leggauss(n)
        pts, wts = 0.5 * (s + 1.0), 0.5 * w
    elif kind == "triangle":
        # collapsed (Duffy) tensor Gauss rule; the Jacobian adds one degree in u
        n = (degree + 1) // 2 + 1
        s, w = np.polynomial.legendre.leggauss(n)
        s, w = 0.5 * (s + 1.0), 0.5 * w
        u, v = np.meshgrid(s, s, indexing="ij")
        wu, wv = np.meshgrid(w, w, indexing="ij")
        x = u.ravel()
        y = (v * (1.0 - u)).ravel()
        wts = (wu * wv * (1.0 - u)).ravel()
        pts = np.stack([1.0 - x - y, x, y], axis=1)
    else:
        raise ValueError(f"unknown quadrature kind {kind!r}")
    pts.setflags(write=False)
    wts.setflags(write=False)
    return QuadratureRule(kind, degree, pts, wts)


def monomial_exponents(m):
    """Exponent pairs of the 2D monomials of total degree <= m, graded order."""
    return [(d - j, j) for d in range(m + 1) for j in range(d + 1)]


def monomials(dx, dy, m):
    """Evaluate centred monomials; returns array of shape ``dx.shape + (nmono,)``."""
    return np.stack([dx**a * dy**b for a, b in monomial_exponents(m)], axis=-1)


def monomial_gradients(dx, dy, m):
    """Gradients of centred monomials, shape ``dx.shape + (nmono, 2)``."""
    out = []
    for a, b in monomial_exponents(m):
        gx = a * dx ** max(a - 1, 0) * dy**b if a else np.zeros_like(dx)
        gy = b * dx**a * dy ** max(b - 1, 0) if b else np.zeros_like(dx)
        out.append(np.stack([gx, gy], axis=-1))
    return np.stack(out, axis=-2)


def interior_basis(dx, dy, k):
    """Vector basis of ``[P_k]^2``: shape ``dx.shape + (2 * nmono, 2)``."""
    mono = monomials(dx, dy, k)
    zero = np.zeros_like(mono)
    first = np.stack([mono, zero], axis=-1)
    second = np.stack([zero, mono], axis=-1)
    return np.concatenate([first, second], axis=-2)


def edge_basis(x, y, a, b, k=1):
    """Basis of the edge space on the segment ``a -> b`` evaluated at ``(x, y)``.

    ``k = 1``: ``(1, 0), (0, 1), (-(y - ym), x - xm)``.  For ``k >= 2`` the rigid
    traces are already in ``[P_{k-1}(e)]^2`` so the basis is ``s^p e_c`` with
    ``s`` the arc parameter centred at the midpoint.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    xm = 0.5 * (a[..., 0] + b[..., 0])
    ym = 0.5 * (a[..., 1] + b[..., 1])
    if np.ndim(x) > np.ndim(xm):
        xm, ym = xm[..., None], ym[..., None]
    one = np.ones_like(x)
    zero = np.zeros_like(x)
    if k == 1:
        return np.stack(
            [np.stack([one, zero], -1), np.stack([zero, one], -1), np.stack([-(y - ym), x - xm], -1)],
            axis=-2,
        )
    d = b - a
    h = np.linalg.norm(d, axis=-1)
    tx = d[..., 0] / h
    ty = d[..., 1] / h
    if np.ndim(x) > np.ndim(tx):
        tx, ty = tx[..., None], ty[..., None]
    s = (x - xm) * tx + (y - ym) * ty
    funcs = []
    for c in range(2):
        for p in range(k):
            val = s**p
            funcs.append(np.stack([val, zero] if c == 0 else [zero, val], -1))
    return np.stack(funcs, axis=-2)


def edge_space_dim(k):
    return 3 if k == 1 else 2 * k


@dataclass(frozen=True, eq=False)
class DofLayout:
    """Global numbering: all interior blocks first, then one block per edge."""

    mesh: object
    k: int
    interior_size: int
    edge_size: int
    constrained: np.ndarray = field(repr=False)

    @property
    def n_interior(self):
        return self.mesh.n_triangles * self.interior_size

    @property
    def n_dofs(self):
        return self.n_interior + self.mesh.n_edges * self.edge_size

    @property
    def n_free(self):
        return int(self.n_dofs - self.constrained.sum())

    @property
    def free(self):
        return np.flatnonzero(~self.constrained)

    @property
    def fixed(self):
        return np.flatnonzero(self.constrained)

    def interior_dofs(self, t):
        return np.arange(t * self.interior_size, (t + 1) * self.interior_size)

    def edge_dofs(self, e):
        start = self.n_interior + e * self.edge_size
        return np.arange(start, start + self.edge_size)

    def element_dofs(self):
        """(nt, interior_size + 3 * edge_size) map from local to global DOFs."""
        nt = self.mesh.n_triangles
        inner = np.arange(nt * self.interior_size).reshape(nt, self.interior_size)
        edge = self.n_interior + self.mesh.tri_edges[:, :, None] * self.edge_size + np.arange(self.edge_size)
        return np.hstack([inner, edge.reshape(nt, 3 * self.edge_size)])


def build_space(mesh, k=1):
    if k != 1:
        raise ValueError(f"space order k={k} is not supported (only k=1)")
    isz = 2 * len(monomial_exponents(k))
    esz = edge_space_dim(k)
    constrained = np.zeros(mesh.n_triangles * isz + mesh.n_edges * esz, dtype=bool)
    bdofs = mesh.n_triangles * isz + np.flatnonzero(mesh.boundary)[:, None] * esz + np.arange(esz)
    constrained[bdofs.ravel()] = True
    constrained.setflags(write=False)
    return DofLayout(mesh, k, isz, esz, constrained)


@dataclass(eq=False)
class WgFunction:
    """A weak function ``{v_0, v_b}`` stored as one coefficient vector."""

    layout: DofLayout
    coeffs: np.ndarray
    info: dict = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.layout.n_dofs,):
            raise ValueError(f"expected {self.layout.n_dofs} coefficients, got {self.coeffs.shape}")

    @property
    def mesh(self):
        return self.layout.mesh

    @property
    def interior(self):
        """(nt, interior_size) view of the v_0 coefficients."""
        lay = self.layout
        return self.coeffs[: lay.n_interior].reshape(-1, lay.interior_size)

    @property
    def edge(self):
        """(ne, edge_size) view of the v_b coefficients."""
        lay = self.layout
        return self.coeffs[lay.n_interior :].reshape(-1, lay.edge_size)

    def local(self):
        """(nt, 15) local coefficient vectors ``[v0, e0, e1, e2]``."""
        return self.coeffs[self.layout.element_dofs()]


# -- quadrature helpers on meshes ------------------------------------------------


def triangle_points(mesh, degree=TRI_DEGREE):
    """Physical quadrature points ``(nt, nq, 2)`` and weights ``(nt, nq)``."""
    rule = quadrature("triangle", degree)
    p = mesh.vertices[mesh.triangles]
    pts = np.einsum("qi,tid->tqd", rule.points, p)
    wts = 2.0 * mesh.areas[:, None] * rule.weights[None, :]
    return pts, wts


def edge_points(a, b, degree=EDGE_DEGREE):
    """Points ``(..., nq, 2)`` and weights ``(..., nq)`` on segments ``a -> b``."""
    rule = quadrature("edge", degree)
    s = rule.points
    pts = a[..., None, :] + s[:, None] * (b - a)[..., None, :]
    h = np.linalg.norm(b - a, axis=-1)
    return pts, h[..., None] * rule.weights


def edge_gram(a, b, k=1, degree=EDGE_DEGREE):
    pts, w = edge_points(a, b, degree)
    phi = edge_basis(pts[..., 0], pts[..., 1], a, b, k)
    return np.einsum("...q,...qid,...qjd->...ij", w, phi, phi)


def project_edges(g, mesh, edge_ids=None, k=1, degree=EDGE_DEGREE):
    """Q_b coefficients ``(n, edge_size)`` of a vector function ``g(x, y) -> (..., 2)``."""
    if edge_ids is None:
        edge_ids = np.arange(mesh.n_edges)
    edge_ids = np.atleast_1d(edge_ids)
    a = mesh.vertices[mesh.edges[edge_ids, 0]]
    b = mesh.vertices[mesh.edges[edge_ids, 1]]
    return project_segment(g, a, b, k, degree)


def project_segment(g, a, b, k=1, degree=EDGE_DEGREE):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    pts, w = edge_points(a, b, degree)
    phi = edge_basis(pts[..., 0], pts[..., 1], a, b, k)
    gram = np.einsum("...q,...qid,...qjd->...ij", w, phi, phi)
    gv = np.asarray(g(pts[..., 0], pts[..., 1]), float)
    rhs = np.einsum("...q,...qid,...qd->...i", w, phi, gv)
    if np.any(np.linalg.det(gram) <= 0):
        raise np.linalg.LinAlgError("singular edge Gram matrix (degenerate edge)")
    return np.linalg.solve(gram, rhs[..., None])[..., 0]


def project_edge(g, mesh, e, k=1):
    """Coefficients of the L2(e) projection of ``g`` onto the edge space of edge ``e``."""
    return project_edges(g, mesh, [e], k)[0]


def project_element(w, mesh, t, m, degree=None):
    """L2(t) projection of ``w(x, y) -> (..., 2)`` onto ``[P_m]^2``.

    Returns the component-major coefficient vector in centred monomials.
    """
    degree = degree if degree is not None else max(TRI_DEGREE, 2 * m + 2)
    rule = quadrature("triangle", degree)
    p = mesh.vertices[mesh.triangles[t]]
    pts = rule.points @ p
    wts = 2.0 * mesh.areas[t] * rule.weights
    c = mesh.centroids[t]
    basis = interior_basis(pts[:, 0] - c[0], pts[:, 1] - c[1], m)
    mass = np.einsum("q,qid,qjd->ij", wts, basis, basis)
    rhs = np.einsum("q,qid,qd->i", wts, basis, np.asarray(w(pts[:, 0], pts[:, 1]), float))
    return np.linalg.solve(mass, rhs)


def trace_projections(mesh, k=1, degree=EDGE_DEGREE):
    """Matrices ``(nt, 3, edge_size, interior_size)`` taking v_0 coefficients to
    the Q_b coefficients of its trace on each local edge."""
    # orient every local edge by the global edge so the edge basis is shared
    ge = mesh.edges[mesh.tri_edges]
    a = mesh.vertices[ge[..., 0]]
    b = mesh.vertices[ge[..., 1]]
    pts, w = edge_points(a, b, degree)
    phi = edge_basis(pts[..., 0], pts[..., 1], a, b, k)
    c = mesh.centroids[:, None, None, :]
    psi = interior_basis(pts[..., 0] - c[..., 0], pts[..., 1] - c[..., 1], k)
    gram = np.einsum("teq,teqid,teqjd->teij", w, phi, phi)
    cross = np.einsum("teq,teqid,teqjd->teij", w, phi, psi)
    return np.linalg.solve(gram, cross)


def interpolate(layout, u, degree=TRI_DEGREE):
    """Weak function with v_0 = L2 projection of ``u`` and v_b = Q_b u on every edge."""
    mesh = layout.mesh
    coeffs = np.empty(layout.n_dofs)
    pts, wts = triangle_points(mesh, degree)
    c = mesh.centroids[:, None, :]
    basis = interior_basis(pts[..., 0] - c[..., 0], pts[..., 1] - c[..., 1], layout.k)
    mass = np.einsum("tq,tqid,tqjd->tij", wts, basis, basis)
    rhs = np.einsum("tq,tqid,tqd->ti", wts, basis, np.asarray(u(pts[..., 0], pts[..., 1]), float))
    coeffs[: layout.n_interior] = np.linalg.solve(mass, rhs[..., None])[..., 0].ravel()
    coeffs[layout.n_interior :] = project_edges(u, mesh, k=layout.k).ravel()
    return WgFunction(layout, coeffs)
