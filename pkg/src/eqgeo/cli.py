"""Command-line front end.

Subcommands:
    christoffel MANIFOLD --at t,a1,...     closed-form vs numeric symbols
    geodesic shoot MANIFOLD ...            integrate an IVP, emit CSV
    geodesic residual MANIFOLD ...         residual report CSV
    geodesic connect MANIFOLD ...          two-point BVP, emit CSV
    fgp check FILE                         FgpReport JSON (manifold/economy)
    corollary FILE                         dashboard JSON
    economy solve|curve|count FILE         equilibrium computations

Exit codes: 0 success/consistent, 1 evaluation failure, 2 THEOREM_VIOLATION
flag raised, 64 usage error. Identical inputs and --seed give byte-identical
output files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fgp, serialize
from .diffgeo import christoffel_from_metric
from .economy import count_equilibria, solve_price_income
from .errors import EqgeoError
from .geodesic import (ExprCurve, arc_length_reparametrize, geodesic_bvp,
                       geodesic_ivp, geodesic_residual)
from .manifolds import (EquilibriumManifoldM2, alpha_line,
                        closed_form_christoffel_M2, coordinate_curves)

USAGE_EXIT = 64
ERROR_EXIT = 1
VIOLATION_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _floats(text):
    return np.array([float(v) for v in text.split(",")], dtype=np.float64)


def _grid(text):
    lo, hi, n = text.split(",")
    return np.linspace(float(lo), float(hi), int(n))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _common(sub):
    sub.add_argument("--seed", type=int, default=0,
                     help="RNG seed recorded in sampled reports")
    sub.add_argument("--tol", type=float, default=None,
                     help="override the geodesic/constancy tolerance")
    sub.add_argument("--out", default=None,
                     help="write the artifact to this file instead of stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="eqgeo",
                     description="equilibrium-manifold geometry toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("christoffel",
                        help="closed-form vs numeric Christoffel symbols")
    p.add_argument("manifold")
    p.add_argument("--at", required=True,
                   help="comma-separated parameter point t,a1,...")
    p.add_argument("--step", type=float, default=1e-5,
                   help="finite-difference step for the numeric symbols")
    _common(p)

    g = subs.add_parser("geodesic", help="geodesic computations")
    gsubs = g.add_subparsers(dest="geodesic_command", required=True)

    p = gsubs.add_parser("shoot", help="integrate an initial value problem")
    p.add_argument("manifold")
    p.add_argument("--x0", required=True)
    p.add_argument("--v0", required=True)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    _common(p)

    p = gsubs.add_parser("residual", help="geodesic residual along a curve")
    p.add_argument("manifold")
    p.add_argument("--curve", required=True,
                   help="coord:<k> | alpha:<t0>,<j> | expr:<e1;e2;...>")
    p.add_argument("--grid", required=True, help="lo,hi,n sample times")
    p.add_argument("--arclength", action="store_true",
                   help="reparametrize to unit metric speed first")
    _common(p)

    p = gsubs.add_parser("connect", help="two-point boundary value problem")
    p.add_argument("manifold")
    p.add_argument("--from", dest="x_start", required=True)
    p.add_argument("--to", dest="x_end", required=True)
    p.add_argument("--step", type=float, default=2e-3)
    _common(p)

    f = subs.add_parser("fgp", help="finite geodesic property checks")
    fsubs = f.add_subparsers(dest="fgp_command", required=True)
    p = fsubs.add_parser("check", help="run the coordinate-curve audit")
    p.add_argument("target", help="manifold or economy JSON file")
    _common(p)

    p = subs.add_parser("corollary",
                        help="constancy/curvature/geodesics/uniqueness "
                             "dashboard")
    p.add_argument("target", help="economy (or economy-backed manifold) JSON")
    p.add_argument("--curvature-samples", type=int, default=50)
    p.add_argument("--fibers", type=int, default=5)
    _common(p)

    e = subs.add_parser("economy", help="equilibrium computations")
    esubs = e.add_subparsers(dest="economy_command", required=True)
    p = esubs.add_parser("solve", help="solve at one income share")
    p.add_argument("economy")
    p.add_argument("--t", type=float, required=True)
    _common(p)
    p = esubs.add_parser("curve", help="sample the price-income curve")
    p.add_argument("economy")
    p.add_argument("--grid", default="0.1,0.9,33", help="lo,hi,n shares")
    _common(p)
    p = esubs.add_parser("count", help="count equilibria on the endowment "
                                       "fiber")
    p.add_argument("economy")
    p.add_argument("--grid-points", type=int, default=4001)
    _common(p)
    return parser


def _load_manifold(path):
    return serialize.load_manifold(path, name=Path(path).stem)


def _make_curve(manifold, spec: str):
    if spec.startswith("coord:"):
        k = int(spec.split(":", 1)[1])
        curves = coordinate_curves(manifold)
        if not 0 <= k < len(curves):
            raise EqgeoError(f"coordinate curve index {k} out of range "
                             f"0..{len(curves) - 1}")
        return curves[k]
    if spec.startswith("alpha:"):
        t0, j = spec.split(":", 1)[1].split(",")
        return alpha_line(manifold, float(t0), int(j))
    if spec.startswith("expr:"):
        comps = spec.split(":", 1)[1].split(";")
        return ExprCurve(comps, (manifold.box.lo[0], manifold.box.hi[0]))
    raise EqgeoError(f"unknown curve spec {spec!r}; use coord:, alpha: "
                     "or expr:")


def _cmd_christoffel(args) -> int:
    man = _load_manifold(args.manifold)
    x = _floats(args.at)
    numeric = christoffel_from_metric(man.immersion, x,
                                      step=args.step).gamma
    report = {"point": list(x), "numeric": numeric,
              "metric_step": args.step}
    lines = []
    closed = None
    if isinstance(man, EquilibriumManifoldM2):
        closed = closed_form_christoffel_M2(man, x).gamma
        report["closed_form"] = closed
        report["max_abs_difference"] = float(np.max(np.abs(closed - numeric)))
    m = len(x)
    lines.append(f"# Christoffel symbols at {tuple(float(v) for v in x)}")
    header = f"{'k i j':8} {'numeric':>24}"
    if closed is not None:
        header += f" {'closed form':>24}"
    lines.append(header)
    for k in range(m):
        for i in range(m):
            for j in range(i, m):
                row = f"{k} {i} {j:<4} {numeric[k, i, j]:>24.16e}"
                if closed is not None:
                    row += f" {closed[k, i, j]:>24.16e}"
                lines.append(row)
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        Path(args.out).write_text(serialize.dump_json(report))
    return 0


def _cmd_geodesic(args) -> int:
    man = _load_manifold(args.manifold)
    if args.geodesic_command == "shoot":
        traj = geodesic_ivp(man, _floats(args.x0), _floats(args.v0),
                            horizon=args.horizon, step=args.step)
        _emit(traj.to_csv(), args.out)
        if traj.exited_domain:
            sys.stderr.write("note: trajectory left the domain early\n")
        return 0
    if args.geodesic_command == "residual":
        curve = _make_curve(man, args.curve)
        grid = _grid(args.grid)
        if args.arclength:
            curve = arc_length_reparametrize(man, curve)
            grid = np.linspace(0.0, curve.length, len(grid))
        rep = geodesic_residual(man, curve, grid)
        _emit(rep.to_csv(), args.out)
        return 0
    traj = geodesic_bvp(man, _floats(args.x_start), _floats(args.x_end),
                        step=args.step)
    _emit(traj.to_csv(), args.out)
    sys.stderr.write(f"geodesic length: {serialize.fmt_float(traj.length())}\n")
    return 0


def _cmd_fgp(args) -> int:
    man = serialize.load_manifold(args.target, name=Path(args.target).stem)
    kwargs = {}
    if args.tol is not None:
        kwargs["geodesic_tol"] = args.tol
        kwargs["constancy_tol"] = args.tol
    report = fgp.check_fgp(man, **kwargs)
    _emit(serialize.dump_json(report.to_dict()), args.out)
    return VIOLATION_EXIT if report.theorem_violation else 0


def _cmd_corollary(args) -> int:
    man = serialize.load_manifold(args.target, name=Path(args.target).stem)
    kwargs = {}
    if args.tol is not None:
        kwargs["geodesic_tol"] = args.tol
        kwargs["constancy_tol"] = args.tol
    dash = fgp.corollary_dashboard(
        man, seed=args.seed, curvature_samples=args.curvature_samples,
        fiber_samples=args.fibers, **kwargs)
    _emit(serialize.dump_json(dash.to_dict()), args.out)
    if dash.fgp.theorem_violation:
        return VIOLATION_EXIT
    return 0 if dash.consistent else ERROR_EXIT


def _cmd_economy(args) -> int:
    economy = serialize.load_economy(args.economy)
    if args.economy_command == "solve":
        p_head, w1 = solve_price_income(economy, args.t)
        _emit(serialize.dump_json({"t": args.t, "p_head": p_head,
                                   "w1": w1}), args.out)
        return 0
    if args.economy_command == "curve":
        from .curves import sample_B_curve
        sampled = sample_B_curve(economy, _grid(args.grid))
        _emit(serialize.b_curve_to_csv(sampled), args.out)
        return 0
    eqset = count_equilibria(economy, n_grid=args.grid_points)
    _emit(serialize.dump_json(serialize.equilibrium_set_to_dict(eqset)),
          args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "christoffel":
            return _cmd_christoffel(args)
        if args.command == "geodesic":
            return _cmd_geodesic(args)
        if args.command == "fgp":
            return _cmd_fgp(args)
        if args.command == "corollary":
            return _cmd_corollary(args)
        if args.command == "economy":
            return _cmd_economy(args)
        parser.error(f"unknown command {args.command!r}")
    except EqgeoError as exc:
        sys.stderr.write(f"eqgeo: {exc}\n")
        return ERROR_EXIT
    except FileNotFoundError as exc:
        sys.stderr.write(f"eqgeo: {exc}\n")
        return ERROR_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
