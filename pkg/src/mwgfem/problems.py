"""Benchmark problems with closed-form solutions.

All data are for  -mu Lap(u) - (lam + mu) grad(div u) = f,  u = g on the boundary.
"""

from enum import Enum

import numpy as np

from .system import ProblemSpec


class BenchmarkId(str, Enum):
    patch_linear = "patch_linear"
    square_smooth = "square_smooth"
    lshape2d_singular = "lshape2d_singular"


ALIASES = {
    "patch": BenchmarkId.patch_linear,
    "square-smooth": BenchmarkId.square_smooth,
    "lshape2d": BenchmarkId.lshape2d_singular,
    "lshape": BenchmarkId.lshape2d_singular,
}


def _pair(a, b):
    return np.stack(np.broadcast_arrays(a, b), axis=-1)


def _matrix(a11, a12, a21, a22):
    return np.stack([_pair(a11, a12), _pair(a21, a22)], axis=-2)


def _patch(mu, lam):
    u = lambda x, y: _pair(x + y, x - y)
    return ProblemSpec(
        mu, lam,
        f=lambda x, y: _pair(0.0 * x, 0.0 * y),
        g=u,
        u=u,
        grad_u=lambda x, y: _matrix(1.0 + 0 * x, 1.0 + 0 * x, 1.0 + 0 * x, -1.0 + 0 * x),
        div_u=lambda x, y: 0.0 * x,
        domain="unit_square",
        name="patch_linear",
    )


def _square_smooth(mu, lam):
    pi = np.pi

    def u(x, y):
        s = np.sin(pi * x) * np.sin(pi * y)
        return _pair(s, s)

    def grad_u(x, y):
        ux = pi * np.cos(pi * x) * np.sin(pi * y)
        uy = pi * np.sin(pi * x) * np.cos(pi * y)
        return _matrix(ux, uy, ux, uy)

    def div_u(x, y):
        return pi * np.cos(pi * x) * np.sin(pi * y) + pi * np.sin(pi * x) * np.cos(pi * y)

    def f(x, y):
        ss = np.sin(pi * x) * np.sin(pi * y)
        cc = np.cos(pi * x) * np.cos(pi * y)
        # Lap u_i = -2 pi^2 ss ;  d_x div u = d_y div u = pi^2 (cc - ss)
        fi = 2 * mu * pi**2 * ss - (lam + mu) * pi**2 * (cc - ss)
        return _pair(fi, fi)

    return ProblemSpec(mu, lam, f=f, g=lambda x, y: _pair(0.0 * x, 0.0 * y), u=u,
                       grad_u=grad_u, div_u=div_u, domain="unit_square", name="square_smooth")


def lshape_angle(x, y):
    """Polar angle in [0, 2 pi); the cut lies in the removed quadrant x > 0, y < 0."""
    theta = np.arctan2(y, x)
    return np.where(theta < 0, theta + 2 * np.pi, theta)


def singular_phi(x, y):
    r = np.hypot(x, y)
    return r ** (2 / 3) * np.sin(2 / 3 * lshape_angle(x, y))


def singular_phi_gradient(x, y):
    """Gradient of r^(2/3) sin(2 theta / 3): ``(-sin(theta/3), cos(theta/3)) * (2/3) r^(-1/3)``."""
    r = np.hypot(x, y)
    t = lshape_angle(x, y)
    c = 2 / 3 * r ** (-1 / 3)
    return -c * np.sin(t / 3), c * np.cos(t / 3)


def singular_phi_hessian(x, y):
    """``(phi_xx, phi_xy, phi_yy)``; phi is harmonic so phi_yy = -phi_xx."""
    r = np.hypot(x, y)
    t = lshape_angle(x, y)
    c = 2 / 9 * r ** (-4 / 3)
    pxx = c * np.sin(4 * t / 3)
    pxy = -c * np.cos(4 * t / 3)
    return pxx, pxy, -pxx


def _lshape(mu, lam):
    def u(x, y):
        p = singular_phi(x, y)
        return _pair(p, p)

    def grad_u(x, y):
        px, py = singular_phi_gradient(x, y)
        return _matrix(px, py, px, py)

    def div_u(x, y):
        px, py = singular_phi_gradient(x, y)
        return px + py

    def f(x, y):
        pxx, pxy, pyy = singular_phi_hessian(x, y)
        return -(lam + mu) * _pair(pxx + pxy, pxy + pyy)

    return ProblemSpec(mu, lam, f=f, g=u, u=u, grad_u=grad_u, div_u=div_u,
                       domain="lshape2d", name="lshape2d_singular")


_BUILDERS = {
    BenchmarkId.patch_linear: _patch,
    BenchmarkId.square_smooth: _square_smooth,
    BenchmarkId.lshape2d_singular: _lshape,
}


def make_problem(pid, mu=0.5, lam=1.0):
    if isinstance(pid, str) and pid in ALIASES:
        pid = ALIASES[pid]
    try:
        pid = BenchmarkId(pid)
    except ValueError:
        raise ValueError(f"unknown benchmark {pid!r}") from None
    if not mu > 0 or not lam >= 0:
        raise ValueError("need mu > 0 and lambda >= 0")
    return _BUILDERS[pid](float(mu), float(lam))
