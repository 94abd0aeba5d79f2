"""Dörfler marking and the SOLVE -> ESTIMATE -> MARK -> REFINE loop."""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .estimator import ErrorIndicators, estimate
from .mesh import bisect, build_initial
from .space import build_space
from .system import SolverError, assemble, energy_error, solve_spd

log = logging.getLogger(__name__)


@dataclass
class AdaptConfig:
    theta: float = 0.5
    tol: float = 1e-8
    max_dofs: int = 50_000
    max_iters: int = 200
    k: int = 1
    uniform: bool = False

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class AdaptRecord:
    """One completed SOLVE + ESTIMATE.  Estimator parts are square roots of their totals."""

    iteration: int
    dofs: int
    n_triangles: int
    eta: float
    eta_c: float
    eta_nc: float
    osc: float
    stab: float
    energy_err: float = float("nan")
    total_err: float = float("nan")
    effectivity: float = float("nan")
    cg_iterations: int = 0
    cg_residual: float = 0.0
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict, repr=False)


def mark_dorfler(indicators, theta):
    """Minimal-cardinality set carrying at least ``theta`` of the total.

    ``indicators`` is an :class:`ErrorIndicators` or per-element squared
    values.  Ties are ordered by element id.  Returns sorted element ids.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if isinstance(indicators, ErrorIndicators):
        eta2 = indicators.per_element
    else:
        eta2 = np.asarray(indicators, float)
    total = eta2.sum()
    if total <= 0:
        return np.zeros(0, dtype=np.int64)
    ids = np.arange(len(eta2))
    order = np.lexsort((ids, -eta2))
    csum = np.cumsum(eta2[order])
    n = int(np.searchsorted(csum, theta * total, side="left")) + 1
    return np.sort(order[:min(n, len(eta2))])


class AdaptError(SolverError):
    pass


def amwg_loop(problem, domain=None, config=None, callback=None, mesh=None):
    """Run the adaptive loop and return one :class:`AdaptRecord` per level.

    Stops when ``eta^2 < tol``, when the next mesh would exceed
    ``max_dofs`` free unknowns, or after ``max_iters`` levels.  ``callback``
    is called as ``callback(record, mesh, u_h, indicators)`` after each level.
    """
    config = config or AdaptConfig()
    if mesh is None:
        mesh = build_initial(domain or problem.domain)
    records = []
    layout = build_space(mesh, config.k)
    for it in range(config.max_iters):
        t0 = time.perf_counter()
        try:
            system = assemble(problem, mesh, layout)
            u_h = solve_spd(system)
        except SolverError as exc:
            err = AdaptError(str(exc), exc.residual, exc.iterations)
            err.records = records
            raise err from exc
        ind = estimate(problem, mesh, layout, u_h)
        tot = ind.totals
        rec = AdaptRecord(
            iteration=it,
            dofs=layout.n_free,
            n_triangles=mesh.n_triangles,
            eta=ind.eta,
            eta_c=np.sqrt(tot["eta_c2"]),
            eta_nc=np.sqrt(tot["eta_nc2"]),
            osc=np.sqrt(tot["osc2"]),
            stab=np.sqrt(tot["stab"]),
            cg_iterations=u_h.info["iterations"],
            cg_residual=u_h.info["residual"],
        )
        if problem.has_exact:
            Eh, _, total = energy_error(problem, u_h)
            rec.energy_err, rec.total_err = Eh, total
            rec.effectivity = Eh / rec.eta if rec.eta > 0 else float("nan")
        rec.wall_time = time.perf_counter() - t0
        records.append(rec)
        log.info("level %d: dofs=%d eta=%.4e err=%.4e", it, rec.dofs, rec.eta, rec.energy_err)
        if callback is not None:
            callback(rec, mesh, u_h, ind)

        if ind.total < config.tol:
            break
        if config.uniform:
            marked = np.arange(mesh.n_triangles)
        else:
            marked = mark_dorfler(ind, config.theta)
        new_mesh = bisect(mesh, marked)
        new_layout = build_space(new_mesh, config.k)
        if new_layout.n_free > config.max_dofs:
            break
        mesh, layout = new_mesh, new_layout
    return records


def fit_slope(x, y):
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
