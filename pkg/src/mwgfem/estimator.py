"""Residual-type a posteriori indicators for the weak Galerkin solution.

Per element ``t``::

    eta_c^2  = h_t^2 (1/mu + 1/(mu+lam)) ||f + div(mu grad_w u) + grad((mu+lam) div_w u)||_t^2
    eta_nc^2 = (1/mu) sum_{e in dt} h_e ||J_e(sigma_w)||_e^2,   sigma_w = mu grad_w u + (mu+lam) div_w u I
    osc^2    = h_t^2 (1/mu + 1/(mu+lam)) ||f - f_h||_t^2
    s_t      = h_t^{-1} ||Q_b u_0 - u_b||_{dt}^2

Each interior edge's jump term is shared half-and-half by its two neighbours,
so summing over elements counts every edge once.
"""

from dataclasses import dataclass

import numpy as np

from .space import EDGE_DEGREE, TRI_DEGREE, edge_points, interior_basis, triangle_points
from .system import stabilizer_values, weak_fields


@dataclass
class ErrorIndicators:
    eta_c2: np.ndarray
    eta_nc2: np.ndarray
    osc2: np.ndarray
    stab: np.ndarray

    @property
    def per_element(self):
        return self.eta_c2 + self.eta_nc2 + self.osc2 + self.stab

    @property
    def totals(self):
        return {
            "eta_c2": float(self.eta_c2.sum()),
            "eta_nc2": float(self.eta_nc2.sum()),
            "osc2": float(self.osc2.sum()),
            "stab": float(self.stab.sum()),
        }

    @property
    def total(self):
        """Grand total eta^2."""
        return float(sum(self.totals.values()))

    @property
    def eta(self):
        return float(np.sqrt(self.total))


def jump(normal1, sigma1, sigma2=None, boundary=False):
    """``sigma1 n1 + sigma2 n2`` with ``n2 = -n1``; zero on boundary edges."""
    n1 = np.asarray(normal1, float)
    if boundary:
        return np.zeros_like(n1)
    return np.asarray(sigma1, float) @ n1 - np.asarray(sigma2, float) @ n1


def weak_stress(problem, u_h):
    gw, dw = weak_fields(u_h)
    return problem.mu * gw + (problem.mu + problem.lam) * dw[:, None, None] * np.eye(2)


def edge_jumps(problem, u_h):
    """Jump vectors ``(ne, 2)``, constant per edge for k = 1, oriented by the first neighbour."""
    mesh = u_h.mesh
    sigma = weak_stress(problem, u_h)
    t1, t2 = mesh.edge_tris[:, 0], mesh.edge_tris[:, 1]
    n1 = mesh.normals[t1, mesh.edge_local[:, 0]]
    J = np.einsum("eij,ej->ei", sigma[t1], n1)
    inner = ~mesh.boundary
    J[inner] -= np.einsum("eij,ej->ei", sigma[t2[inner]], n1[inner])
    J[mesh.boundary] = 0.0
    return J


def estimate(problem, mesh, layout, u_h, degree=TRI_DEGREE):
    mu, lam = problem.mu, problem.lam
    weight = mesh.diameters**2 * (1.0 / mu + 1.0 / (mu + lam))

    pts, wts = triangle_points(mesh, degree)
    fv = np.asarray(problem.f(pts[..., 0], pts[..., 1]), float)
    # k = 1: the weak stress is element-wise constant, its derivatives vanish
    eta_c2 = weight * np.einsum("tq,tqd->t", wts, fv**2)
    fbar = np.einsum("tq,tqd->td", wts, fv) / mesh.areas[:, None]
    osc2 = weight * np.einsum("tq,tqd->t", wts, (fv - fbar[:, None]) ** 2)

    J = edge_jumps(problem, u_h)
    he = mesh.edge_lengths
    edge_term = he * he * np.sum(J**2, axis=1) / mu     # h_e * ||J||_e^2, J constant on e
    eta_nc2 = np.zeros(mesh.n_triangles)
    inner = np.flatnonzero(~mesh.boundary)
    np.add.at(eta_nc2, mesh.edge_tris[inner, 0], 0.5 * edge_term[inner])
    np.add.at(eta_nc2, mesh.edge_tris[inner, 1], 0.5 * edge_term[inner])

    stab = stabilizer_values(u_h)
    return ErrorIndicators(eta_c2, eta_nc2, osc2, np.maximum(stab, 0.0))


def trace_jump_sum(v, degree=None):
    """``sum_{interior e} h_e^{-1} ||v0|_{t1} - v0|_{t2}||_e^2`` (not part of the estimator)."""
    mesh = v.mesh
    inner = np.flatnonzero(~mesh.boundary)
    a = mesh.vertices[mesh.edges[inner, 0]]
    b = mesh.vertices[mesh.edges[inner, 1]]
    pts, w = edge_points(a, b, degree or EDGE_DEGREE)
    vals = []
    for side in range(2):
        t = mesh.edge_tris[inner, side]
        c = mesh.centroids[t][:, None, :]
        B = interior_basis(pts[..., 0] - c[..., 0], pts[..., 1] - c[..., 1], v.layout.k)
        vals.append(np.einsum("eqid,ei->eqd", B, v.interior[t]))
    jump2 = np.einsum("eq,eqd->e", w, (vals[0] - vals[1]) ** 2)
    return float(np.sum(jump2 / mesh.edge_lengths[inner]))
