"""Assembly of the weak Galerkin elasticity system, SPD solve and error norms."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .space import (
    TRI_DEGREE,
    WgFunction,
    edge_gram,
    interior_basis,
    project_edges,
    trace_projections,
    triangle_points,
)
from .weak_ops import weak_operator_matrices


class SolverError(RuntimeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class ProblemSpec:
    """Lamé parameters, data and (optionally) the exact displacement.

    Callables take coordinate arrays ``x, y`` and return ``(..., 2)`` for
    vectors, ``(..., 2, 2)`` for the gradient (``[i, j] = d u_i / d x_j``)
    and ``(...)`` for the divergence.
    """

    mu: float
    lam: float
    f: object
    g: object
    u: object = None
    grad_u: object = None
    div_u: object = None
    domain: str = "unit_square"
    name: str = ""

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    @staticmethod
    def lame_from_young(E, nu):
        if not 0 <= nu < 0.5:
            raise ValueError(f"Poisson ratio must lie in [0, 0.5), got {nu}")
        if not E > 0:
            raise ValueError("Young's modulus must be positive")
        return E / (2 * (1 + nu)), E * nu / ((1 + nu) * (1 - 2 * nu))

    @classmethod
    def from_young(cls, E, nu, **kwargs):
        mu, lam = cls.lame_from_young(E, nu)
        return cls(mu=mu, lam=lam, **kwargs)

    @property
    def has_exact(self):
        return self.grad_u is not None and self.div_u is not None

    def scaled(self, c):
        """Same problem with data and exact solution multiplied by ``c``."""

        def mul(fn):
            return None if fn is None else (lambda x, y: c * np.asarray(fn(x, y)))

        return ProblemSpec(self.mu, self.lam, mul(self.f), mul(self.g), mul(self.u),
                           mul(self.grad_u), mul(self.div_u), self.domain, self.name)


@dataclass
class SparseSymSystem:
    A: sp.csr_matrix        # free-free block
    b: np.ndarray
    fixed_values: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    layout: object
    A_full: sp.csr_matrix = None


def _stabilizer_parts(mesh):
    """Edge residual operators ``B`` (nt, 3, 3, 15) with ``B c = Q_b v0 - v_b`` and edge Grams."""
    nt = mesh.n_triangles
    P = trace_projections(mesh)                      # (nt, 3, 3, 6)
    ge = mesh.edges[mesh.tri_edges]
    gram = edge_gram(mesh.vertices[ge[..., 0]], mesh.vertices[ge[..., 1]])   # (nt, 3, 3, 3)
    B = np.zeros((nt, 3, 3, 15))
    B[..., :6] = P
    for e in range(3):
        B[:, e, :, 6 + 3 * e: 9 + 3 * e] = -np.eye(3)
    return B, gram


def stabilizer_matrices(mesh):
    """Local matrices of ``h_t^{-1} <Q_b v0 - v_b, Q_b w0 - w_b>_{dt}``, shape (nt, 15, 15)."""
    B, gram = _stabilizer_parts(mesh)
    S = np.einsum("teai,teab,tebj->tij", B, gram, B)
    return S / mesh.diameters[:, None, None]


def element_matrices(mesh, mu, lam):
    """Local stiffness ``(nt, 15, 15)`` of a_w and its three parts."""
    G, D = weak_operator_matrices(mesh)
    area = mesh.areas[:, None, None]
    Kg = mu * area * np.einsum("tai,taj->tij", G, G)
    Kd = (mu + lam) * area * np.einsum("ti,tj->tij", D, D)
    S = stabilizer_matrices(mesh)
    return Kg + Kd + S, (Kg, Kd, S)


def load_vector(mesh, layout, f, degree=TRI_DEGREE):
    pts, wts = triangle_points(mesh, degree)
    c = mesh.centroids[:, None, :]
    basis = interior_basis(pts[..., 0] - c[..., 0], pts[..., 1] - c[..., 1], layout.k)
    fv = np.asarray(f(pts[..., 0], pts[..., 1]), float)
    loc = np.einsum("tq,tqid,tqd->ti", wts, basis, fv)
    b = np.zeros(layout.n_dofs)
    b[: layout.n_interior] = loc.ravel()
    return b


def global_matrix(mesh, layout, K):
    dofs = layout.element_dofs()
    n = dofs.shape[1]
    rows = np.repeat(dofs, n, axis=1).ravel()
    cols = np.tile(dofs, (1, n)).ravel()
    A = sp.coo_matrix((K.ravel(), (rows, cols)), shape=(layout.n_dofs, layout.n_dofs))
    return A.tocsr()


def boundary_values(mesh, layout, g):
    """Q_b g on the constrained (boundary) edge DOFs, in ``layout.fixed`` order."""
    bedges = np.flatnonzero(mesh.boundary)
    if bedges.size == 0:
        return np.zeros(0)
    vals = np.zeros(layout.n_dofs)
    coeffs = project_edges(g, mesh, bedges, layout.k)
    for j in range(layout.edge_size):
        vals[layout.n_interior + bedges * layout.edge_size + j] = coeffs[:, j]
    return vals[layout.fixed]


def assemble(problem, mesh, layout):
    K, _ = element_matrices(mesh, problem.mu, problem.lam)
    A = global_matrix(mesh, layout, K)
    rhs = load_vector(mesh, layout, problem.f)
    free, fixed = layout.free, layout.fixed
    gvals = boundary_values(mesh, layout, problem.g)
    A_ff = A[free][:, free].tocsr()
    b = rhs[free] - A[free][:, fixed] @ gvals
    return SparseSymSystem(A_ff, b, gvals, free, fixed, layout, A)


def pcg(A, b, tol=1e-12, maxiter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops on the true relative residual ``||b - Ax|| / ||b|| <= tol``; the
    recursive residual is refreshed periodically to prevent drift.
    Returns ``(x, info)``.
    """
    n = len(b)
    maxiter = 20 * n if maxiter is None else maxiter
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(n), {"iterations": 0, "residual": 0.0}
    dinv = 1.0 / A.diagonal()
    x = np.zeros(n) if x0 is None else np.array(x0, float)
    r = b - A @ x
    z = dinv * r
    p = z.copy()
    rz = r @ z
    it = 0
    res = np.linalg.norm(r) / bnorm
    while it < maxiter:
        if res <= tol:
            r = b - A @ x
            res = np.linalg.norm(r) / bnorm
            if res <= tol:
                break
            z = dinv * r
            p = z.copy()
            rz = r @ z
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        it += 1
        if it % 200 == 0:
            r = b - A @ x
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
        res = np.linalg.norm(r) / bnorm
    else:
        raise SolverError(f"PCG did not converge in {maxiter} iterations (residual {res:.3e})",
                          residual=res, iterations=it)
    return x, {"iterations": it, "residual": float(res)}


def solve_spd(system, tol=1e-12, maxiter=None):
    x, info = pcg(system.A, system.b, tol=tol, maxiter=maxiter)
    coeffs = np.zeros(system.layout.n_dofs)
    coeffs[system.free] = x
    coeffs[system.fixed] = system.fixed_values
    return WgFunction(system.layout, coeffs, info)


def stabilizer_values(u_h):
    """Per-element ``s_t(u_h, u_h)``."""
    B, gram = _stabilizer_parts(u_h.mesh)
    r = np.einsum("teai,ti->tea", B, u_h.local())
    s = np.einsum("tea,teab,teb->t", r, gram, r) / u_h.mesh.diameters
    return np.maximum(s, 0.0)


def a_w(mu, lam, w, v):
    K, _ = element_matrices(w.mesh, mu, lam)
    return float(np.einsum("ti,tij,tj->", v.local(), K, w.local()))


def weak_fields(u_h):
    """Element-wise ``grad_w u_h`` (nt, 2, 2) and ``div_w u_h`` (nt,)."""
    G, D = weak_operator_matrices(u_h.mesh)
    loc = u_h.local()
    return np.einsum("tai,ti->ta", G, loc).reshape(-1, 2, 2), np.einsum("ti,ti->t", D, loc)


def energy_error(problem, u_h, degree=TRI_DEGREE, per_element=False):
    """``(E_h, s(u_h, u_h), total)`` where ``total = sqrt(E_h^2 + s)``."""
    if not problem.has_exact:
        raise ValueError("energy error requires the exact gradient and divergence")
    mesh = u_h.mesh
    gw, dw = weak_fields(u_h)
    pts, wts = triangle_points(mesh, degree)
    gu = np.asarray(problem.grad_u(pts[..., 0], pts[..., 1]), float)
    du = np.asarray(problem.div_u(pts[..., 0], pts[..., 1]), float)
    eg = np.einsum("tq,tqij->t", wts, (gu - gw[:, None]) ** 2)
    ed = np.einsum("tq,tq->t", wts, (du - dw[:, None]) ** 2)
    local = problem.mu * eg + (problem.mu + problem.lam) * ed
    stab = float(stabilizer_values(u_h).sum())
    Eh = float(np.sqrt(local.sum()))
    out = (Eh, stab, float(np.sqrt(Eh**2 + stab)))
    return (out, local) if per_element else out
