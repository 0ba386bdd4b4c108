"""Numeric backend selection.

The compiled extension (`eqgeo._vm`, Cython) and the pure-Python module
(`eqgeo._vm_py`) implement the same four entry points:

    eval0(program, x)      -> value
    eval1(program, x)      -> (value, gradient)
    eval2(program, x)      -> (value, gradient, hessian)
    eval_grid(program, ts) -> values on a grid (one-variable programs)

The compiled one is used for the per-point entry points when importable; set
EQGEO_BACKEND=pure to force the fallback (e.g. for benchmarking) or
EQGEO_BACKEND=compiled to fail loudly if the extension is missing. Grid
evaluation is dispatched to the numpy-vectorized machine under either
backend, which benchmarks faster than scalar C loops on wide grids.
"""

import os

_choice = os.environ.get("EQGEO_BACKEND", "auto").strip().lower()

if _choice not in ("auto", "compiled", "pure"):
    raise RuntimeError(f"EQGEO_BACKEND must be auto, compiled or pure "
                       f"(got {_choice!r})")

if _choice == "pure":
    from . import _vm_py as _impl
else:
    try:
        from . import _vm as _impl
    except ImportError:
        if _choice == "compiled":
            raise RuntimeError("EQGEO_BACKEND=compiled but the eqgeo._vm "
                               "extension is not built") from None
        from . import _vm_py as _impl

from . import _vm_py as _grid_impl

eval0 = _impl.eval0
eval1 = _impl.eval1
eval2 = _impl.eval2
# grid evaluation always uses the numpy-vectorized machine: one pass over
# whole arrays beats a C loop of scalar evaluations on wide grids
eval_grid = _grid_impl.eval_grid


def backend_name() -> str:
    """'compiled' when the Cython kernel is active, else 'pure'."""
    return "compiled" if _impl.NAME == "compiled" else "pure"
