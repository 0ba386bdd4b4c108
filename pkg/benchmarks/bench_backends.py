#!/usr/bin/env python3
"""Compare the compiled expression-VM backend against the pure-Python
fallback on the kernel-bound workloads: Christoffel assembly, geodesic
integration, residual sweeps, and raw expression grids.

Usage:
    python benchmarks/bench_backends.py            # run both, print a table
    python benchmarks/bench_backends.py --single   # current backend only

The two-backend mode re-executes this script in subprocesses with
EQGEO_BACKEND set, so each run selects its backend at import time exactly
the way a user's process would.
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _workloads():
    import numpy as np

    from eqgeo import diffgeo as dg, geodesic as ge, immersion as im
    from eqgeo import manifolds as mf
    from eqgeo.curves import ExprPriceCurve
    from eqgeo.expr import parse_curve_expr

    sphere = dg.Manifold(im.sphere_chart())
    curve = ExprPriceCurve(
        ["2 + 0.5*sin(t)", "1.5 + 0.25*cos(t)", "1 + 0.2*sin(2*t)"],
        "1 + 0.3*t^2 + 0.1*sin(t)", (0.0, 1.0))
    l4 = mf.assemble_phi(curve)
    rng = np.random.default_rng(0)
    sphere_pts = sphere.box.sample(rng, 200)

    def christoffel_sweep():
        for x in sphere_pts:
            dg.christoffel_from_metric(sphere.immersion, x)

    def geodesic_sphere():
        ge.geodesic_ivp(sphere, [1.1, 0.0], [0.35, 1.0], horizon=1.0,
                        step=2e-3)

    def residual_sweep():
        for c in mf.coordinate_curves(l4):
            ge.geodesic_residual(l4, c, np.linspace(0.0, 1.0, 201))

    expr = parse_curve_expr("sin(t)*exp(-t/3) + t^3/(t^2+1) + sqrt(t+2)")
    ts = np.linspace(0.0, 1.0, 10000)

    def expression_grid():
        for _ in range(20):
            expr.grid(ts)

    def curvature_samples():
        for x in sphere_pts[:40]:
            u, v = rng.normal(size=2), rng.normal(size=2)
            try:
                dg.sectional_curvature(sphere.immersion, x, u, v)
            except ValueError:
                pass

    return [
        ("christoffel central-diff, sphere, 200 pts", christoffel_sweep),
        ("geodesic RK4, sphere, 500 steps", geodesic_sphere),
        ("coordinate-curve residuals, L=4, 4x201 pts", residual_sweep),
        ("expression grid, 20x10k points", expression_grid),
        ("sectional curvature, sphere, 40 samples", curvature_samples),
    ]


def run_single():
    from eqgeo import backend_name
    results = {"backend": backend_name(), "timings": {}}
    for name, fn in _workloads():
        fn()  # warm caches and the program compiler
        reps = 0
        best = float("inf")
        t_budget = time.perf_counter() + 2.0
        while time.perf_counter() < t_budget or reps < 3:
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
            reps += 1
            if reps >= 15:
                break
        results["timings"][name] = best
    return results


def run_both():
    rows = {}
    for backend in ("compiled", "pure"):
        env = dict(os.environ, EQGEO_BACKEND=backend)
        try:
            out = subprocess.run(
                [sys.executable, __file__, "--single", "--json"],
                env=env, capture_output=True, text=True, check=True)
        except subprocess.CalledProcessError as exc:
            if backend == "compiled":
                print("compiled backend unavailable; showing pure only",
                      file=sys.stderr)
                continue
            raise SystemExit(exc.stderr)
        rows[backend] = json.loads(out.stdout)["timings"]
    names = list(next(iter(rows.values())).keys())
    width = max(len(n) for n in names)
    have_both = len(rows) == 2
    header = f"{'workload':<{width}}  {'compiled':>10}  {'pure':>10}"
    if have_both:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name in names:
        c = rows.get("compiled", {}).get(name)
        p = rows.get("pure", {}).get(name)
        line = f"{name:<{width}}"
        line += f"  {c * 1e3:>8.1f}ms" if c is not None else f"  {'-':>10}"
        line += f"  {p * 1e3:>8.1f}ms" if p is not None else f"  {'-':>10}"
        if have_both:
            line += f"  {p / c:>7.1f}x"
        print(line)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--single", action="store_true",
                        help="benchmark only the currently selected backend")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable timings")
    args = parser.parse_args()
    if args.single:
        results = run_single()
        if args.json:
            print(json.dumps(results))
        else:
            print(f"backend: {results['backend']}")
            for name, t in results["timings"].items():
                print(f"  {name:<45} {t * 1e3:8.1f} ms")
    else:
        run_both()


if __name__ == "__main__":
    main()
