"""File formats: economy and manifold JSON schemas, deterministic report
dumps, and CSV helpers.

Economy JSON:
    { "L": int,
      "preferences": [ {"kind": "cobb_douglas", "alpha": [...]}
                     | {"kind": "ces", "alpha": [...], "rho": num} , x2 ],
      "r": [...], "omega1": [...]? }

Manifold JSON (kind selects the family):
    analytic:        { "kind": "analytic", "L": int, "p": [expr...],
                       "w": expr, "domain": {"t": [lo,hi], "alpha": [lo,hi]} }
    equilibrium_m2:  { "kind": "equilibrium_m2", "economy": {...},
                       "domain": {"t": [lo,hi], "alpha": [lo,hi]}? }
    remark1:         { "kind": "remark1", "L": int, "p": [L-2 constant
                       exprs], "w": expr?, "domain": ... }
    remark2:         { "kind": "remark2", "L": int, "gamma": [g1, g2],
                       "domain": ... }

"analytic" curves are positivity-validated at load; "remark1" deliberately
is not (its whole point is the sign crossing inside the domain). Floats are
printed with repr(), the shortest representation that round-trips exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .curves import ExprPriceCurve
from .economy import Economy, Preference
from .errors import EqgeoError
from .manifolds import (assemble_phi, manifold_from_economy,
                        remark1_manifold, remark2_hypersurface)

DEFAULT_ALPHA = (-2.0, 2.0)


def fmt_float(v: float) -> str:
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dump_json(obj) -> str:
    """Deterministic JSON: sorted keys, repr-formatted floats, LF newline."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _read(source) -> dict:
    if isinstance(source, dict):
        return source
    text = Path(source).read_text()
    return json.loads(text)


def load_economy(source) -> Economy:
    """Build an Economy from a JSON dict or file path."""
    spec = _read(source)
    try:
        prefs = tuple(
            Preference(kind=p["kind"], alpha=p["alpha"],
                       rho=p.get("rho")) for p in spec["preferences"])
        return Economy(L=int(spec["L"]), preferences=prefs, r=spec["r"],
                       omega1=spec.get("omega1"))
    except KeyError as exc:
        raise EqgeoError(f"economy spec missing field {exc}") from None


def is_economy_spec(spec: dict) -> bool:
    return "preferences" in spec


def _domain(spec, default_t, default_alpha=DEFAULT_ALPHA):
    dom = spec.get("domain", {})
    t = dom.get("t", list(default_t))
    alpha = dom.get("alpha", list(default_alpha))
    return (float(t[0]), float(t[1])), (float(alpha[0]), float(alpha[1]))


def load_manifold(source, name: str = ""):
    """Build a manifold from a JSON dict or file path.

    Economy JSON is accepted directly (treated as "equilibrium_m2" with the
    default domain)."""
    spec = _read(source)
    label = name or (str(source) if not isinstance(source, dict) else "")
    if is_economy_spec(spec):
        spec = {"kind": "equilibrium_m2", "economy": spec}
    kind = spec.get("kind")
    if kind == "analytic":
        tspan, alpha = _domain(spec, (0.0, 1.0))
        p_exprs = list(spec["p"])
        if len(p_exprs) != int(spec["L"]) - 1:
            raise EqgeoError(f"analytic manifold: expected L-1 = "
                             f"{int(spec['L']) - 1} price expressions, got "
                             f"{len(p_exprs)}")
        curve = ExprPriceCurve(p_exprs, spec["w"], tspan,
                               name=label or "analytic")
        return assemble_phi(curve, alpha_span=alpha,
                            name=label or "analytic")
    if kind == "equilibrium_m2":
        economy = load_economy(spec["economy"])
        tspan, alpha = _domain(spec, (0.1, 0.9))
        return manifold_from_economy(economy, tspan=tspan, alpha_span=alpha,
                                     name=label or "equilibrium_m2")
    if kind == "remark1":
        tspan, alpha = _domain(spec, (-1.0, 1.0))
        constants = [float(_const_expr(c)) for c in spec.get("p", [])]
        man = remark1_manifold(int(spec["L"]), constants,
                               w=spec.get("w", "1"), tspan=tspan)
        return man
    if kind == "remark2":
        tspan, _ = _domain(spec, (0.0, 1.0))
        g1, g2 = spec.get("gamma", ["cos(t)", "sin(t)"])
        return remark2_hypersurface(int(spec["L"]), g1, g2, tspan=tspan)
    raise EqgeoError(f"unknown manifold kind {kind!r}; expected analytic, "
                     "equilibrium_m2, remark1 or remark2")


def _const_expr(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    from . import _backend
    from .expr import compile_expr, parse
    prog = compile_expr(parse(str(text), variables=()), ())
    return _backend.eval0(prog, np.zeros(0))


def economy_to_dict(economy: Economy) -> dict:
    prefs = []
    for p in economy.preferences:
        d = {"kind": p.kind, "alpha": list(p.alpha)}
        if p.rho is not None:
            d["rho"] = p.rho
        prefs.append(d)
    out = {"L": economy.L, "preferences": prefs, "r": list(economy.r)}
    if economy.omega1 is not None:
        out["omega1"] = list(economy.omega1)
    return out


def equilibrium_set_to_dict(eqset) -> dict:
    return {
        "endowment": list(eqset.endowment),
        "roots": [{"p1": r[0], "residual": r[1]} for r in eqset.roots],
        "count": eqset.count,
        "censored": eqset.censored,
        "even_count_suspect": eqset.even_count_suspect,
    }


def b_curve_to_csv(sampled) -> str:
    """CSV of a sampled price-income curve: t, p_*, w, dp_*, dw."""
    head = len(sampled.p[0]) if len(sampled.p) else 0
    cols = (["t"] + [f"p_{j}" for j in range(head)] + ["w"]
            + [f"dp_{j}" for j in range(head)] + ["dw"])
    lines = [",".join(cols)]
    for t, p, dp, w, dw in sampled.to_rows():
        row = [t, *p, w, *dp, dw]
        lines.append(",".join(fmt_float(v) for v in row))
    return "\n".join(lines) + "\n"
