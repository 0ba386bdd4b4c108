"""Differential geometry on immersed manifolds.

Everything is computed from the immersion: the metric is the pullback of the
ambient Euclidean inner product, Christoffel symbols come from the standard
formula

    Gamma^k_ij = 1/2 sum_h g^{hk} (d_i g_jh + d_j g_hi - d_h g_ij),

and the curvature tensor is assembled from the symbols and their
finite-difference derivatives. Metric derivatives use either second-order
central differences ("central", the default) or the immersion's exact second
derivatives via forward-mode duals ("dual").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImmersionError, DomainError, MetricError
from .immersion import ImmersionMap

DEFAULT_METRIC_STEP = 1e-5
INVERSE_TOL = 1e-10

ENGINES = ("central", "dual")


@dataclass(frozen=True)
class MetricTensor:
    """Induced metric at a point: g and its inverse, both m x m."""

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.g @ np.asarray(v))

    def norm(self, u) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))


@dataclass(frozen=True)
class ChristoffelSymbols:
    """gamma[k, i, j] = Gamma^k_ij, symmetric in (i, j)."""

    point: np.ndarray
    gamma: np.ndarray


@dataclass(frozen=True)
class CurvatureReport:
    """Sectional curvature of span(u, v) plus the largest curvature entry."""

    point: np.ndarray
    u: np.ndarray
    v: np.ndarray
    sectional: float
    riemann_max_abs: float


def jacobian(f: ImmersionMap, x) -> np.ndarray:
    """Jacobian of the immersion at an interior point, checked for full rank."""
    x = np.asarray(x, dtype=np.float64)
    f.box.require_interior(x)
    jac = f.jacobian(x)
    rank = np.linalg.matrix_rank(jac, tol=1e-10 * max(1.0, float(np.max(np.abs(jac)))))
    if rank < f.dim_param:
        raise DegenerateImmersionError(
            f"not an immersion here: Jacobian rank {rank} < {f.dim_param} "
            f"at {tuple(x)}", point=x)
    return jac


def _metric_matrix(f: ImmersionMap, x) -> np.ndarray:
    g = f.metric(x)
    return 0.5 * (g + g.T)


def induced_metric(f: ImmersionMap, x) -> MetricTensor:
    """Pullback metric at x; raises MetricError off the SPD cone."""
    x = np.asarray(x, dtype=np.float64)
    f.box.require_interior(x)
    g = _metric_matrix(f, x)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise MetricError(
            f"induced metric is not positive definite at {tuple(x)} "
            "(rank-deficient immersion)", point=x) from None
    g_inv = np.linalg.inv(g)
    resid = np.max(np.abs(g @ g_inv - np.eye(f.dim_param)))
    if resid > INVERSE_TOL:
        raise MetricError(
            f"metric inverse check failed at {tuple(x)}: |g g^-1 - I| = "
            f"{resid:.3e} > {INVERSE_TOL:g}", point=x)
    return MetricTensor(point=x, g=g, g_inv=g_inv)


def metric_derivatives(f: ImmersionMap, x, step: float = DEFAULT_METRIC_STEP,
                       engine: str = "central") -> np.ndarray:
    """dg[h, i, j] = d g_ij / d x_h.

    "central": second-order central differences with per-coordinate step
    step * (1 + |x_h|); the stencil must stay inside the domain box.
    "dual": exact, from the immersion's second derivatives.
    """
    x = np.asarray(x, dtype=np.float64)
    if engine == "dual":
        return f.metric_derivs_exact(x)
    if engine != "central":
        raise ValueError(f"unknown derivative engine {engine!r}")
    m = f.dim_param
    dg = np.empty((m, m, m))

    def stencil_metric(y):
        g = _metric_matrix(f, y)
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise MetricError(
                f"metric is not positive definite at stencil point "
                f"{tuple(y)}", point=y) from None
        return g

    for h in range(m):
        dh = step * (1.0 + abs(float(x[h])))
        xp = x.copy()
        xm = x.copy()
        xp[h] += dh
        xm[h] -= dh
        if not (f.box.contains(xp) and f.box.contains(xm)):
            raise DomainError(
                f"finite-difference stencil of half-width {dh:g} along "
                f"coordinate {h} leaves the domain at {tuple(x)}; "
                "reduce the step", point=x)
        dg[h] = (stencil_metric(xp) - stencil_metric(xm)) / (2.0 * dh)
    return dg


def christoffel_from_metric(f: ImmersionMap, x,
                            step: float = DEFAULT_METRIC_STEP,
                            engine: str = "central") -> ChristoffelSymbols:
    """Levi-Civita symbols of the induced metric at x."""
    x = np.asarray(x, dtype=np.float64)
    met = induced_metric(f, x)
    dg = metric_derivatives(f, x, step=step, engine=engine)
    # bracket[h,i,j] = d_i g_jh + d_j g_hi - d_h g_ij
    #                = dg[i,j,h]  + dg[j,h,i]  - dg[h,i,j]
    bracket = dg.transpose(1, 2, 0) + dg.transpose(2, 0, 1) - dg
    gamma = 0.5 * np.einsum("hk,hij->kij", met.g_inv, bracket)
    gamma = 0.5 * (gamma + gamma.transpose(0, 2, 1))  # exact (i,j) symmetry
    return ChristoffelSymbols(point=x, gamma=gamma)


def _gamma_grid_fn(f, step, engine):
    def gamma_at(y):
        return christoffel_from_metric(f, y, step=step, engine=engine).gamma
    return gamma_at


def _auto_curv_step(gamma_fn, engine) -> float:
    # exact Christoffel data tolerates a small differencing step; the central
    # engine's ~1e-10 noise forces a larger one (optimum near its cube root)
    if gamma_fn is not None or engine == "dual":
        return 3e-5
    return 5e-4


def riemann_tensor(f: ImmersionMap, x, gamma_fn=None,
                   curv_step: float | None = None,
                   metric_step: float = DEFAULT_METRIC_STEP,
                   engine: str = "dual") -> np.ndarray:
    """R[l, i, j, k] with R(e_i, e_j) e_k = sum_l R[l,i,j,k] e_l.

    Christoffel derivatives are central differences of gamma_fn (default:
    christoffel_from_metric with the chosen engine) at step
    curv_step * (1 + |x_i|).
    """
    x = np.asarray(x, dtype=np.float64)
    m = f.dim_param
    if curv_step is None:
        curv_step = _auto_curv_step(gamma_fn, engine)
    if gamma_fn is None:
        gamma_fn = _gamma_grid_fn(f, metric_step, engine)
    gamma = gamma_fn(x)
    dgamma = np.empty((m, m, m, m))  # dgamma[h, k, i, j] = d_h Gamma^k_ij
    for h in range(m):
        dh = curv_step * (1.0 + abs(float(x[h])))
        xp = x.copy()
        xm = x.copy()
        xp[h] += dh
        xm[h] -= dh
        if not (f.box.contains(xp) and f.box.contains(xm)):
            raise DomainError(
                f"curvature stencil leaves the domain at {tuple(x)}",
                point=x)
        dgamma[h] = (gamma_fn(xp) - gamma_fn(xm)) / (2.0 * dh)
    # R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^m_jk G^l_im - G^m_ik G^l_jm
    riem = (np.einsum("iljk->lijk", dgamma)
            - np.einsum("jlik->lijk", dgamma)
            + np.einsum("mjk,lim->lijk", gamma, gamma)
            - np.einsum("mik,ljm->lijk", gamma, gamma))
    return riem


def sectional_curvature(f: ImmersionMap, x, u, v, gamma_fn=None,
                        curv_step: float | None = None,
                        metric_step: float = DEFAULT_METRIC_STEP,
                        engine: str = "dual") -> CurvatureReport:
    """Sectional curvature of the tangent 2-plane spanned by u and v.

    K = <R(u,v)v, u>_g / (<u,u>_g <v,v>_g - <u,v>_g^2). Fails on a
    degenerate plane (u, v linearly dependent).
    """
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    met = induced_metric(f, x)
    guu = met.inner(u, u)
    gvv = met.inner(v, v)
    guv = met.inner(u, v)
    denom = guu * gvv - guv * guv
    if denom <= 1e-12 * max(guu * gvv, 1e-300):
        raise ValueError(f"degenerate tangent plane at {tuple(x)}: "
                         "u and v are (numerically) parallel")
    riem = riemann_tensor(f, x, gamma_fn=gamma_fn, curv_step=curv_step,
                          metric_step=metric_step, engine=engine)
    ruvv = np.einsum("lijk,i,j,k->l", riem, u, v, v)
    sec = float(ruvv @ met.g @ u) / denom
    return CurvatureReport(point=x, u=u, v=v, sectional=sec,
                           riemann_max_abs=float(np.max(np.abs(riem))))


class Manifold:
    """An immersion plus a Christoffel evaluation policy.

    The generic gamma() runs christoffel_from_metric; subclasses with closed
    forms override it. ``stencil`` overrides the metric-derivative step for a
    single call (the geodesic integrator ties it to its own step size).
    """

    def __init__(self, immersion: ImmersionMap, name: str = "",
                 engine: str = "central",
                 metric_step: float = DEFAULT_METRIC_STEP):
        self.immersion = immersion
        self.name = name or immersion.name
        self.engine = engine
        self.metric_step = metric_step

    @property
    def dim(self) -> int:
        return self.immersion.dim_param

    @property
    def box(self):
        return self.immersion.box

    def metric(self, x) -> MetricTensor:
        return induced_metric(self.immersion, x)

    def metric_raw(self, x) -> np.ndarray:
        return _metric_matrix(self.immersion, np.asarray(x, dtype=np.float64))

    def gamma(self, x, stencil: float | None = None) -> np.ndarray:
        step = self.metric_step if stencil is None else stencil
        return christoffel_from_metric(self.immersion, x, step=step,
                                       engine=self.engine).gamma

    def gamma_stencil_margin(self, stencil: float | None = None) -> float:
        """Worst-case half-width of the metric stencil inside the box."""
        if self.engine == "dual":
            return 0.0
        step = self.metric_step if stencil is None else stencil
        extent = max(max(abs(l), abs(h))
                     for l, h in zip(self.box.lo, self.box.hi))
        return step * (1.0 + extent)

    def sectional(self, x, u, v, curv_step: float | None = None) -> CurvatureReport:
        gamma_fn = (lambda y: self.gamma(y))
        if curv_step is None and self.engine == "central":
            curv_step = _auto_curv_step(None, "central")
        return sectional_curvature(self.immersion, x, u, v,
                                   gamma_fn=gamma_fn, curv_step=curv_step)

    def __repr__(self):
        return (f"{type(self).__name__}({self.name!r}, dim={self.dim}, "
                f"ambient={self.immersion.dim_ambient})")
