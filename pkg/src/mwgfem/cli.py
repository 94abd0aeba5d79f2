"""Command-line front end.

    mwgfem solve --problem lshape2d --theta 0.5 --max-dofs 50000 --out l.csv --figures figs/
    mwgfem plot a.csv b.csv --labels "0.1" "0.3" --out cmp.png
"""

import argparse
import csv
import logging
import os
import sys

from .adaptivity import AdaptConfig, AdaptError, amwg_loop
from .mesh import write_mesh
from .problems import ALIASES, BenchmarkId, make_problem
from .report import CSV_FIELDS, plot_comparison, plot_convergence, plot_mesh, read_history, record_row

PROBLEM_CHOICES = sorted(ALIASES) + [b.value for b in BenchmarkId]


def build_parser():
    parser = argparse.ArgumentParser(prog="mwgfem", description="Adaptive weak Galerkin solver for 2D linear elasticity.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the adaptive loop (or uniform refinement) and write a CSV history")
    s.add_argument("--problem", required=True, choices=PROBLEM_CHOICES)
    s.add_argument("--theta", type=float, default=0.5, help="Dörfler marking parameter in (0, 1)")
    s.add_argument("--tol", type=float, default=1e-8, help="stop once eta^2 < tol")
    s.add_argument("--max-dofs", type=int, default=50_000)
    s.add_argument("--max-iters", type=int, default=200)
    s.add_argument("--k", type=int, default=1, help="polynomial order (only 1 is supported)")
    s.add_argument("--mu", type=float, default=0.5)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--out", required=True, help="output CSV path")
    s.add_argument("--mesh-dir", help="write mesh_<iter>.txt snapshots here")
    s.add_argument("--figures", help="render convergence and final-mesh figures into this directory")
    s.add_argument("--uniform", action="store_true", help="refine every element instead of marking")
    s.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("plot", help="render convergence figures from CSV histories")
    p.add_argument("csv", nargs="+")
    p.add_argument("--labels", nargs="+")
    p.add_argument("--out", required=True)
    return parser


def _solve(args, parser):
    if args.k != 1:
        parser.error(f"--k {args.k} is not supported; only k=1 is implemented")
    try:
        config = AdaptConfig(theta=args.theta, tol=args.tol, max_dofs=args.max_dofs,
                             max_iters=args.max_iters, k=args.k, uniform=args.uniform)
        problem = make_problem(args.problem, args.mu, args.lam)
    except ValueError as exc:
        parser.error(str(exc))
    for d in (args.mesh_dir, args.figures):
        if d:
            os.makedirs(d, exist_ok=True)

    last = {}
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        fh.flush()

        def on_level(rec, mesh, u_h, ind):
            writer.writerow(record_row(rec))
            fh.flush()
            last["mesh"] = mesh
            if args.mesh_dir:
                write_mesh(mesh, os.path.join(args.mesh_dir, f"mesh_{rec.iteration}.txt"))

        try:
            records = amwg_loop(problem, config=config, callback=on_level)
        except AdaptError as exc:
            print(f"mwgfem: solver failure after {len(exc.records)} levels: {exc}", file=sys.stderr)
            return 1

    if args.figures:
        plot_convergence(records, os.path.join(args.figures, "convergence.png"), title=problem.name)
        plot_mesh(last["mesh"], os.path.join(args.figures, "mesh_final.png"),
                  title=f"level {records[-1].iteration}, {records[-1].dofs} unknowns")
    return 0


def _plot(args, parser):
    labels = args.labels or [os.path.splitext(os.path.basename(c))[0] for c in args.csv]
    if len(labels) != len(args.csv):
        parser.error("--labels must match the number of CSV files")
    histories = {lab: read_history(c) for lab, c in zip(labels, args.csv)}
    if len(histories) == 1:
        plot_convergence(next(iter(histories.values())), args.out, title=labels[0])
    else:
        plot_comparison(histories, args.out)
    return 0


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(message)s")
    if args.command == "solve":
        return _solve(args, parser)
    return _plot(args, parser)


def main():
    sys.exit(run())
