"""Figures for convergence histories and meshes, rendered straight to files."""

import csv

import numpy as np
from matplotlib.figure import Figure

CSV_FIELDS = ["iter", "dofs", "eta", "eta_c", "eta_nc", "osc", "stab",
              "energy_err", "total_err", "effectivity"]


def record_row(rec):
    vals = [rec.eta, rec.eta_c, rec.eta_nc, rec.osc, rec.stab,
            rec.energy_err, rec.total_err, rec.effectivity]
    return [str(rec.iteration), str(rec.dofs)] + [f"{float(v):.16e}" for v in vals]


def read_history(path):
    """Columns of a convergence CSV as float arrays keyed by header name."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in CSV_FIELDS}


def _history(obj):
    if isinstance(obj, dict):
        return obj
    return {
        "dofs": np.array([r.dofs for r in obj], float),
        "eta": np.array([r.eta for r in obj]),
        "energy_err": np.array([r.energy_err for r in obj]),
    }


def _slope_guide(ax, dofs, values, slope=-0.5):
    x0, y0 = dofs[-1], values[-1]
    xs = np.array([dofs[0], dofs[-1]])
    ax.loglog(xs, 0.6 * y0 * (xs / x0) ** slope, "k--", lw=1, label=f"slope {slope:g}")


def plot_convergence(history, path, title=None):
    """Log-log plot of the estimator and the energy error against DOFs."""
    h = _history(history)
    fig = Figure(figsize=(5.5, 4.2))
    ax = fig.subplots()
    ax.loglog(h["dofs"], h["eta"], "o-", ms=3, label=r"$\eta$")
    if np.all(np.isfinite(h["energy_err"])):
        ax.loglog(h["dofs"], h["energy_err"], "s-", ms=3, label=r"$E_h$")
    _slope_guide(ax, h["dofs"], h["eta"])
    ax.set_xlabel("number of unknowns")
    ax.set_ylabel("error / estimator")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


def plot_comparison(histories, path):
    """Energy error (left) and estimator (right) for several labelled runs."""
    fig = Figure(figsize=(10, 4.2))
    axes = fig.subplots(1, 2)
    for label, hist in histories.items():
        h = _history(hist)
        axes[0].loglog(h["dofs"], h["energy_err"], "o-", ms=3, label=label)
        axes[1].loglog(h["dofs"], h["eta"], "o-", ms=3, label=label)
    for ax, key, name in zip(axes, ("energy_err", "eta"), (r"$E_h$", r"$\eta$")):
        last = _history(next(iter(histories.values())))
        _slope_guide(ax, last["dofs"], last[key])
        ax.set_xlabel("number of unknowns")
        ax.set_ylabel(name)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


def plot_mesh(mesh, path, title=None):
    fig = Figure(figsize=(5, 5))
    ax = fig.subplots()
    ax.triplot(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles, lw=0.3, color="k")
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path
