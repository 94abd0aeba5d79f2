"""Adaptive modified weak Galerkin FEM for 2D linear elasticity."""

from .adaptivity import AdaptConfig, AdaptRecord, amwg_loop, mark_dorfler
from .estimator import ErrorIndicators, estimate
from .mesh import Mesh, bisect, build_initial
from .problems import BenchmarkId, make_problem
from .space import DofLayout, WgFunction, build_space
from .system import ProblemSpec, assemble, energy_error, solve_spd

__all__ = [
    "AdaptConfig", "AdaptRecord", "amwg_loop", "mark_dorfler",
    "ErrorIndicators", "estimate",
    "Mesh", "bisect", "build_initial",
    "BenchmarkId", "make_problem",
    "DofLayout", "WgFunction", "build_space",
    "ProblemSpec", "assemble", "energy_error", "solve_spd",
]
