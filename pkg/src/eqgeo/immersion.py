"""Immersed-manifold charts: rectangular domains and immersion maps.

An immersion map takes an m-dimensional parameter box into n-dimensional
Euclidean space (n >= m) and exposes value, Jacobian and second derivatives
at any interior point. Two families live here:

* AnalyticImmersion - components are expressions of the parameter variables;
  derivatives come from the backend's forward-mode duals (exact).
* JetImmersion - components assembled from caller-supplied jet callbacks
  (used by the equilibrium manifolds, whose structure gives derivatives in
  closed form from the underlying price-income curve).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend, expr
from .errors import DomainError


@dataclass(frozen=True)
class Box:
    """Axis-aligned parameter domain with strict interior checks."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo/hi length mismatch")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty box: lo={self.lo} hi={self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x, margin: float = 0.0) -> bool:
        return all(l + margin <= xi <= h - margin
                   for xi, l, h in zip(x, self.lo, self.hi))

    def require_interior(self, x, margin: float = 0.0):
        if not self.contains(x, margin):
            raise DomainError(
                f"point {tuple(float(v) for v in x)} is outside the domain "
                f"box lo={self.lo} hi={self.hi}"
                + (f" (margin {margin:g})" if margin else ""),
                point=x)

    def shrink(self, margin: float) -> "Box":
        lo = tuple(l + margin for l in self.lo)
        hi = tuple(h - margin for h in self.hi)
        return Box(lo, hi)

    def sample(self, rng: np.random.Generator, count: int = 1,
               margin_frac: float = 0.05) -> np.ndarray:
        """Uniform interior samples, keeping a relative margin off the walls."""
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        pad = margin_frac * (hi - lo)
        return rng.uniform(lo + pad, hi - pad, size=(count, self.dim))

    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))


class ImmersionMap:
    """Base: value/jacobian/second_derivs over a Box domain."""

    dim_param: int
    dim_ambient: int
    box: Box

    def eval(self, x) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        """n x m matrix; column j is the partial derivative in parameter j."""
        raise NotImplementedError

    def second_derivs(self, x) -> np.ndarray:
        """n x m x m array of component Hessians."""
        raise NotImplementedError

    def metric(self, x) -> np.ndarray:
        """Pullback of the ambient Euclidean inner product: J^T J."""
        jac = self.jacobian(x)
        return jac.T @ jac

    def metric_derivs_exact(self, x) -> np.ndarray:
        """dg[h, i, j] = d g_ij / d x_h from first and second derivatives."""
        jac = self.jacobian(x)
        hes = self.second_derivs(x)
        # d g_ij/d x_h = sum_a (H[a,i,h] J[a,j] + J[a,i] H[a,j,h])
        half = np.einsum("aih,aj->hij", hes, jac)
        return half + half.transpose(0, 2, 1)


class AnalyticImmersion(ImmersionMap):
    """Immersion whose components are expressions of named parameters."""

    def __init__(self, components, variables, box: Box, name: str = ""):
        self.variables = tuple(variables)
        self.components = tuple(
            expr.parse(c, self.variables) if isinstance(c, str) else c
            for c in components)
        if box.dim != len(self.variables):
            raise ValueError("box dimension does not match variable count")
        if len(self.components) < len(self.variables):
            raise ValueError("ambient dimension below parameter dimension")
        self.box = box
        self.name = name or "analytic"
        self.dim_param = len(self.variables)
        self.dim_ambient = len(self.components)
        self._programs = tuple(expr.compile_expr(c, self.variables)
                               for c in self.components)

    def eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.array([_backend.eval0(p, x) for p in self._programs])

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        rows = [_backend.eval1(p, x)[1] for p in self._programs]
        return np.vstack(rows)

    def second_derivs(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.stack([_backend.eval2(p, x)[2] for p in self._programs])

    def value_jet(self, x):
        """(f, J, H) in one pass."""
        x = np.asarray(x, dtype=np.float64)
        vals, grads, hesss = [], [], []
        for p in self._programs:
            v, g, h = _backend.eval2(p, x)
            vals.append(v)
            grads.append(g)
            hesss.append(h)
        return np.array(vals), np.vstack(grads), np.stack(hesss)


class JetImmersion(ImmersionMap):
    """Immersion defined by a single callback returning (f, J, H) at x."""

    def __init__(self, jet_fn, dim_param, dim_ambient, box: Box,
                 name: str = ""):
        self._jet = jet_fn
        self.dim_param = dim_param
        self.dim_ambient = dim_ambient
        self.box = box
        self.name = name or "jet"

    def value_jet(self, x):
        return self._jet(np.asarray(x, dtype=np.float64))

    def eval(self, x) -> np.ndarray:
        return self.value_jet(x)[0]

    def jacobian(self, x) -> np.ndarray:
        return self.value_jet(x)[1]

    def second_derivs(self, x) -> np.ndarray:
        return self.value_jet(x)[2]


# charts used widely in tests and benchmarks

def flat_plane(extent: float = 10.0) -> AnalyticImmersion:
    """(x, y) -> (x, y, 0): the trivial immersed plane."""
    return AnalyticImmersion(
        ["u", "v", "0"], ("u", "v"),
        Box((-extent, -extent), (extent, extent)), name="flat-plane")


def polar_chart(r_lo: float = 0.5, r_hi: float = 5.0) -> AnalyticImmersion:
    """(r, theta) -> (r cos theta, r sin theta): flat plane, curved chart."""
    return AnalyticImmersion(
        ["r * cos(th)", "r * sin(th)"], ("r", "th"),
        Box((r_lo, -8.0), (r_hi, 8.0)), name="polar")


def sphere_chart(theta_margin: float = 0.25) -> AnalyticImmersion:
    """Colatitude/longitude chart of the unit sphere, poles excluded."""
    return AnalyticImmersion(
        ["sin(th) * cos(ph)", "sin(th) * sin(ph)", "cos(th)"],
        ("th", "ph"),
        Box((theta_margin, -8.0), (np.pi - theta_margin, 8.0)),
        name="unit-sphere")
