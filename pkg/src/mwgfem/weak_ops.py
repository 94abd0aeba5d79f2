"""Discrete weak gradient and weak divergence.

Two independent routes are provided.  ``weak_operator_matrices`` is the
vectorised ``k = 1`` closed form: the test space is constant, so

    grad_w v = (1/|t|) sum_e  int_e v_b (x) n ds,     div_w v = trace(grad_w v),

and only the edge means of ``v_b`` enter.  ``local_weak_operators`` assembles
and solves the defining local system against a polynomial test basis by
quadrature, for arbitrary order, on a single triangle given by coordinates.

Local DOF vectors are ``[v0 (interior_size), e0, e1, e2]`` with edge ``i``
opposite vertex ``i``.  Gradient rows are ordered ``(i, j)`` row-major, with
entry ``[i, j] = d v_i / d x_j``.
"""

from collections import namedtuple

import numpy as np

from .space import (
    EDGE_DEGREE,
    edge_basis,
    edge_points,
    edge_space_dim,
    interior_basis,
    monomial_exponents,
    monomial_gradients,
    monomials,
    quadrature,
)

ElementWeakOps = namedtuple("ElementWeakOps", ["triangle", "G", "D"])


def weak_operator_matrices(mesh):
    """Closed-form ``k = 1`` operators for every element.

    Returns ``G`` of shape ``(nt, 4, 15)`` and ``D`` of shape ``(nt, 15)``.
    """
    nt = mesh.n_triangles
    G = np.zeros((nt, 4, 15))
    # int_e phi_3 ds = 0: the rotation mode has zero mean about the midpoint
    scale = mesh.local_edge_lengths / mesh.areas[:, None]
    for e in range(3):
        for i in range(2):
            for j in range(2):
                G[:, 2 * i + j, 6 + 3 * e + i] = scale[:, e] * mesh.normals[:, e, j]
    D = G[:, 0] + G[:, 3]
    return G, D


def element_weak_ops(mesh, t, method="closed"):
    """Weak operators of triangle ``t`` by the closed form or the generic solve."""
    if method == "closed":
        G, D = weak_operator_matrices(mesh)
        return ElementWeakOps(int(t), G[t], D[t])
    if method == "generic":
        xy = mesh.vertices[mesh.triangles[t]]
        ge = mesh.edges[mesh.tri_edges[t]]
        G, D = local_weak_operators(xy, k=1, edge_orientation=mesh.vertices[ge])
        return ElementWeakOps(int(t), G, D)
    raise ValueError(f"unknown method {method!r}")


def weak_gradient(mesh, t, local_coeffs):
    """``grad_w v`` on triangle ``t`` as a 2x2 matrix (k = 1)."""
    ops = element_weak_ops(mesh, t)
    return (ops.G @ np.asarray(local_coeffs, float)).reshape(2, 2)


def weak_divergence(mesh, t, local_coeffs):
    ops = element_weak_ops(mesh, t)
    return float(ops.D @ np.asarray(local_coeffs, float))


def _local_edges(xy):
    """Endpoints (3, 2, 2), lengths and outward normals of local edges."""
    a = np.stack([xy[(i + 1) % 3] for i in range(3)])
    b = np.stack([xy[(i + 2) % 3] for i in range(3)])
    d = b - a
    h = np.linalg.norm(d, axis=1)
    n = np.stack([d[:, 1], -d[:, 0]], axis=1) / h[:, None]
    return a, b, h, n


def local_weak_operators(xy, k=1, edge_orientation=None, tri_degree=None, edge_degree=None):
    """Weak gradient/divergence matrices on one triangle via the local mass solve.

    ``xy`` are the three counter-clockwise vertex coordinates.  The edge basis
    of local edge ``i`` is built on the segment ``edge_orientation[i]``
    (defaults to the local edge itself); for ``k = 1`` the basis does not
    depend on orientation.

    Returns ``G`` with rows ``(i, j, alpha)`` over ``[P_{k-1}]^{2x2}`` and
    ``D`` with rows ``alpha`` over ``P_{k-1}``, both acting on the local DOF
    vector ``[v0, e0, e1, e2]``.
    """
    xy = np.asarray(xy, float)
    d1, d2 = xy[1] - xy[0], xy[2] - xy[0]
    area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
    c = xy.mean(axis=0)
    m = k - 1
    nmono = len(monomial_exponents(m))
    ni = 2 * len(monomial_exponents(k))
    ne = edge_space_dim(k)
    nloc = ni + 3 * ne
    tri_degree = tri_degree if tri_degree is not None else 2 * k + 2
    edge_degree = edge_degree if edge_degree is not None else max(EDGE_DEGREE, 2 * k + 1)

    rule = quadrature("triangle", tri_degree)
    pts = rule.points @ xy
    w = 2.0 * area * rule.weights
    dx, dy = pts[:, 0] - c[0], pts[:, 1] - c[1]
    mono = monomials(dx, dy, m)                  # (q, a)
    dmono = monomial_gradients(dx, dy, m)        # (q, a, 2)
    v0 = interior_basis(dx, dy, k)               # (q, ni, 2)

    mass = np.einsum("q,qa,qb->ab", w, mono, mono)

    # gradient: psi = mono_a E_ij, div(psi)_r = delta_ri d_j mono_a
    RG = np.zeros((2, 2, nmono, nloc))
    for i in range(2):
        for j in range(2):
            RG[i, j, :, :ni] = -np.einsum("q,qn,qa->an", w, v0[:, :, i], dmono[:, :, j])
    RD = np.zeros((nmono, nloc))
    RD[:, :ni] = -np.einsum("q,qnd,qad->an", w, v0, dmono)

    a, b, h, n = _local_edges(xy)
    if edge_orientation is None:
        edge_orientation = np.stack([a, b], axis=1)
    for e in range(3):
        epts, ew = edge_points(a[e], b[e], edge_degree)
        oa, ob = edge_orientation[e]
        phi = edge_basis(epts[:, 0], epts[:, 1], oa, ob, k)      # (q, ne, 2)
        emono = monomials(epts[:, 0] - c[0], epts[:, 1] - c[1], m)
        cols = slice(ni + ne * e, ni + ne * (e + 1))
        for i in range(2):
            for j in range(2):
                RG[i, j, :, cols] += np.einsum("q,qn,qa->an", ew, phi[:, :, i], emono) * n[e, j]
        RD[:, cols] += np.einsum("q,qn,qa->an", ew, phi @ n[e], emono)

    minv = np.linalg.inv(mass)
    G = np.einsum("ab,ijbn->ijan", minv, RG).reshape(4 * nmono, nloc)
    D = minv @ RD
    if m == 0:
        D = D[0]
    return G, D
