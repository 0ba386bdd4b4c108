"""Geodesic equation machinery: integration, residual measurement,
arc-length reparametrization, ambient normal-parallelism, and two-point
boundary solving.

A geodesic satisfies  x''^k + Gamma^k_ij x'^i x'^j = 0.  The residual of an
arbitrary curve is split g-orthogonally against its own velocity: a curve
whose *normal* residual vanishes is a geodesic up to reparametrization
(a pregeodesic), which is the acceptance notion used throughout since the
constant-price theorems assume arc-length parametrization while callers
supply whatever parametrization is convenient.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .diffgeo import Manifold, metric_derivatives
from .errors import ConvergenceError, DomainError, EqgeoError
from .immersion import ImmersionMap

GEODESIC_TOL = 1e-8        # max normal residual accepted as "is a geodesic"
FAILURE_THRESHOLD = 1e-3   # residuals above this count as "clearly not"
DEFAULT_IVP_STEP = 1e-3
# the Gamma stencil follows the integration step so the dominant energy-drift
# term scales like step^2 (and therefore quarters when the step halves);
# the floor keeps central differences out of the roundoff regime
STENCIL_FACTOR = 0.25
STENCIL_FLOOR = 1e-5


def _fmt(v: float) -> str:
    return repr(float(v))


# --------------------------------------------------------------------------
# Parameter-space curves


class ParamCurve:
    """A twice-differentiable curve t -> R^m in parameter coordinates."""

    tspan: tuple

    def eval(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def d1(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def d2(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def jets(self, t: float):
        return self.eval(t), self.d1(t), self.d2(t)


class LineCurve(ParamCurve):
    """x(t) = point + t * direction."""

    def __init__(self, point, direction, tspan):
        self.point = np.asarray(point, dtype=np.float64)
        self.direction = np.asarray(direction, dtype=np.float64)
        self.tspan = (float(tspan[0]), float(tspan[1]))

    def eval(self, t):
        return self.point + t * self.direction

    def d1(self, t):
        return self.direction.copy()

    def d2(self, t):
        return np.zeros_like(self.direction)


class ExprCurve(ParamCurve):
    """Coordinates given by one-variable curve expressions."""

    def __init__(self, components, tspan):
        from .expr import parse_curve_expr
        self.components = tuple(
            parse_curve_expr(c) if isinstance(c, str) else c
            for c in components)
        self.tspan = (float(tspan[0]), float(tspan[1]))

    def jets(self, t):
        jets = [c.jet(t) for c in self.components]
        arr = np.asarray(jets, dtype=np.float64)
        return arr[:, 0], arr[:, 1], arr[:, 2]

    def eval(self, t):
        return self.jets(t)[0]

    def d1(self, t):
        return self.jets(t)[1]

    def d2(self, t):
        return self.jets(t)[2]


class WarpedCurve(ParamCurve):
    """base(tau(s)) for a smooth monotone time warp tau."""

    def __init__(self, base: ParamCurve, tau, dtau, ddtau, sspan):
        self.base = base
        self.tau = tau
        self.dtau = dtau
        self.ddtau = ddtau
        self.tspan = (float(sspan[0]), float(sspan[1]))

    def jets(self, s):
        t = self.tau(s)
        x, v, a = self.base.jets(t)
        dt = self.dtau(s)
        return x, v * dt, a * dt * dt + v * self.ddtau(s)

    def eval(self, s):
        return self.base.eval(self.tau(s))

    def d1(self, s):
        return self.jets(s)[1]

    def d2(self, s):
        return self.jets(s)[2]


class SampledCurve(ParamCurve):
    """Positions on a uniform time grid; derivatives by finite differences.

    Interior nodes use 5-point centered stencils; the outermost nodes use
    one-sided 4-point stencils and their neighbours 3-point centered ones.
    Jets are only available at the grid nodes.
    """

    def __init__(self, ts, xs):
        self.ts = np.asarray(ts, dtype=np.float64)
        self.xs = np.asarray(xs, dtype=np.float64)
        if self.ts.ndim != 1 or self.xs.shape[0] != self.ts.shape[0]:
            raise ValueError("ts and xs must share their leading length")
        if len(self.ts) < 5:
            raise ValueError("need at least 5 samples for the stencils")
        h = np.diff(self.ts)
        if np.max(np.abs(h - h[0])) > 1e-9 * max(abs(h[0]), 1e-30):
            raise ValueError("sampled curves require a uniform grid")
        self.h = float(h[0])
        self.tspan = (float(self.ts[0]), float(self.ts[-1]))
        self._v, self._a = self._differentiate()

    def _differentiate(self):
        x = self.xs
        h = self.h
        n = len(self.ts)
        v = np.empty_like(x)
        a = np.empty_like(x)
        # interior: 5-point centered, O(h^4)
        v[2:n - 2] = (x[:n - 4] - 8 * x[1:n - 3] + 8 * x[3:n - 1]
                      - x[4:n]) / (12 * h)
        a[2:n - 2] = (-x[:n - 4] + 16 * x[1:n - 3] - 30 * x[2:n - 2]
                      + 16 * x[3:n - 1] - x[4:n]) / (12 * h * h)
        # ends: one-sided 4-point
        v[0] = (-11 * x[0] + 18 * x[1] - 9 * x[2] + 2 * x[3]) / (6 * h)
        a[0] = (2 * x[0] - 5 * x[1] + 4 * x[2] - x[3]) / (h * h)
        v[-1] = (11 * x[-1] - 18 * x[-2] + 9 * x[-3] - 2 * x[-4]) / (6 * h)
        a[-1] = (2 * x[-1] - 5 * x[-2] + 4 * x[-3] - x[-4]) / (h * h)
        # next-to-ends: centered 3-point
        v[1] = (x[2] - x[0]) / (2 * h)
        a[1] = (x[2] - 2 * x[1] + x[0]) / (h * h)
        v[-2] = (x[-1] - x[-3]) / (2 * h)
        a[-2] = (x[-1] - 2 * x[-2] + x[-3]) / (h * h)
        return v, a

    def _index(self, t):
        i = int(round((t - self.ts[0]) / self.h))
        if i < 0 or i >= len(self.ts) or abs(self.ts[i] - t) > 1e-9 * max(
                1.0, abs(t)):
            raise ValueError(f"t={t!r} is not a node of the sampled curve")
        return i

    def eval(self, t):
        return self.xs[self._index(t)].copy()

    def d1(self, t):
        return self._v[self._index(t)].copy()

    def d2(self, t):
        return self._a[self._index(t)].copy()


# --------------------------------------------------------------------------
# Trajectories (integration output)


@dataclass
class Trajectory:
    """Time-sampled geodesic states in parameter coordinates."""

    times: np.ndarray          # (n,)
    xs: np.ndarray             # (n, m)
    vs: np.ndarray             # (n, m)
    metric_speeds: np.ndarray  # (n,) sqrt(<v,v>_g)
    step: float
    exited_domain: bool
    metadata: dict = field(default_factory=dict)

    @property
    def endpoint(self) -> np.ndarray:
        return self.xs[-1]

    def energy_drift(self) -> float:
        """Max relative drift of the conserved metric speed."""
        s0 = self.metric_speeds[0]
        return float(np.max(np.abs(self.metric_speeds - s0)) / abs(s0))

    def as_sampled_curve(self) -> SampledCurve:
        return SampledCurve(self.times, self.xs)

    def length(self) -> float:
        return float(np.trapezoid(self.metric_speeds, self.times))

    def to_csv(self) -> str:
        m = self.xs.shape[1]
        cols = (["time"] + [f"x_{i}" for i in range(m)]
                + [f"v_{i}" for i in range(m)] + ["metric_speed"])
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for k in range(len(self.times)):
            row = ([self.times[k]] + list(self.xs[k]) + list(self.vs[k])
                   + [self.metric_speeds[k]])
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


@dataclass
class ResidualReport:
    """Geodesic-equation residual along a curve, split g-orthogonally."""

    grid: np.ndarray
    total: np.ndarray        # Euclidean norm over components
    total_g: np.ndarray      # g-norm of the same residual vector
    normal: np.ndarray       # g-norm of the component g-orthogonal to x'
    tangential: np.ndarray   # g-norm of the remainder (parallel to x')
    speed_sq: np.ndarray     # <x', x'>_g per sample

    @property
    def max_normal(self) -> float:
        return float(np.max(self.normal))

    @property
    def max_total(self) -> float:
        return float(np.max(self.total))

    @property
    def max_scaled_total(self) -> float:
        """Max of |residual|_g / <x',x'>_g: the parametrization-scale-free
        measure of how far the curve is from solving the ODE as given."""
        return float(np.max(self.total_g / self.speed_sq))

    def is_pregeodesic(self, tol: float = GEODESIC_TOL) -> bool:
        return self.max_normal <= tol

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,total,normal,tangential\n")
        for k in range(len(self.grid)):
            buf.write(",".join(_fmt(v) for v in
                               (self.grid[k], self.total[k], self.normal[k],
                                self.tangential[k])) + "\n")
        return buf.getvalue()


# --------------------------------------------------------------------------
# Initial value problem


def geodesic_ivp(manifold: Manifold, x0, v0, horizon: float,
                 step: float = DEFAULT_IVP_STEP,
                 stencil: float | None = None) -> Trajectory:
    """Classic fixed-step RK4 on (x' = v, v'^k = -Gamma^k_ij v^i v^j).

    Stops early with ``exited_domain`` set if the state leaves the domain
    box (shrunk by the Christoffel stencil margin so stencils stay inside).
    """
    x0 = np.asarray(x0, dtype=np.float64)
    v0 = np.asarray(v0, dtype=np.float64)
    if step <= 0:
        raise ValueError("step must be positive")
    if not np.any(v0):
        raise ValueError("initial velocity must be nonzero")
    manifold.box.require_interior(x0)

    if stencil is None:
        stencil = max(STENCIL_FACTOR * step, STENCIL_FLOOR)
    margin = manifold.gamma_stencil_margin(stencil)

    def acc(x, v):
        gamma = manifold.gamma(x, stencil=stencil)
        return -np.einsum("kij,i,j->k", gamma, v, v)

    n_steps = max(1, int(round(horizon / step)))
    h = horizon / n_steps
    times = [0.0]
    xs = [x0.copy()]
    vs = [v0.copy()]
    exited = False
    x, v = x0.copy(), v0.copy()
    for k in range(n_steps):
        if not manifold.box.contains(x, margin=margin):
            exited = True
            break
        try:
            k1x, k1v = v, acc(x, v)
            k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x,
                                              v + 0.5 * h * k1v)
            k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x,
                                              v + 0.5 * h * k2v)
            k4x, k4v = v + h * k3v, acc(x + h * k3x, v + h * k3v)
        except DomainError:
            exited = True
            break
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not manifold.box.contains(x):
            exited = True
            break
        times.append((k + 1) * h)
        xs.append(x.copy())
        vs.append(v.copy())

    times = np.asarray(times)
    xs = np.asarray(xs)
    vs = np.asarray(vs)
    speeds = np.array([manifold.metric(xs[i]).norm(vs[i])
                       for i in range(len(times))])
    return Trajectory(
        times=times, xs=xs, vs=vs, metric_speeds=speeds, step=h,
        exited_domain=exited,
        metadata={"manifold": manifold.name, "integrator": "rk4",
                  "step_policy": f"stencil=max({STENCIL_FACTOR:g}*step,"
                                 f"{STENCIL_FLOOR:g})"})


# --------------------------------------------------------------------------
# Residuals


def geodesic_residual(manifold: Manifold, curve: ParamCurve,
                      grid) -> ResidualReport:
    """Residual of the geodesic ODE along ``curve`` at the given times."""
    grid = np.asarray(grid, dtype=np.float64)
    m = manifold.dim
    total = np.empty(len(grid))
    total_g = np.empty(len(grid))
    normal = np.empty(len(grid))
    tangential = np.empty(len(grid))
    speed_sq = np.empty(len(grid))
    for k, t in enumerate(grid):
        x, v, a = curve.jets(t)
        if not manifold.box.contains(x):
            raise DomainError(
                f"curve point {tuple(x)} at t={t:g} lies outside the "
                f"manifold domain", point=x)
        gamma = manifold.gamma(x)
        r = a + np.einsum("kij,i,j->k", gamma, v, v)
        g = manifold.metric_raw(x)
        total[k] = float(np.linalg.norm(r))
        rg = float(r @ g @ r)
        total_g[k] = np.sqrt(max(rg, 0.0))
        vv = float(v @ g @ v)
        speed_sq[k] = max(vv, 1e-300)
        if vv <= 1e-300:
            tang = np.zeros(m)
        else:
            tang = (float(r @ g @ v) / vv) * v
        nrm = r - tang
        normal[k] = np.sqrt(max(float(nrm @ g @ nrm), 0.0))
        tangential[k] = np.sqrt(max(float(tang @ g @ tang), 0.0))
    return ResidualReport(grid=grid, total=total, total_g=total_g,
                          normal=normal, tangential=tangential,
                          speed_sq=speed_sq)


# --------------------------------------------------------------------------
# Arc length


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _gl_integrate(fn, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * sum(w * fn(mid + half * xi)
                      for xi, w in zip(_GL_NODES, _GL_WEIGHTS))


class ArcLengthCurve(ParamCurve):
    """A curve reparametrized to unit metric speed.

    The map s -> t inverts the cumulative arc length (panelwise
    Gauss-Legendre prefix sums plus Newton polish); derivatives follow the
    chain rule with the exact speed derivative, which needs the metric and
    its first derivatives along the curve.
    """

    def __init__(self, manifold: Manifold, base: ParamCurve, tspan=None,
                 panels: int = 96):
        self.manifold = manifold
        self.base = base
        t0, t1 = tspan if tspan is not None else base.tspan
        self.base_span = (float(t0), float(t1))
        self._check_regular()
        self._edges = np.linspace(t0, t1, panels + 1)
        lengths = []
        for a, b in zip(self._edges[:-1], self._edges[1:]):
            lengths.append(_gl_integrate(self._speed, a, b))
        self._prefix = np.concatenate([[0.0], np.cumsum(lengths)])
        self.length = float(self._prefix[-1])
        self.tspan = (0.0, self.length)

    def _check_regular(self, samples: int = 513):
        ts = np.linspace(*self.base_span, samples)
        speeds = np.array([self._speed_unchecked(t) for t in ts])
        floor = max(1e-5 * float(np.max(speeds)), 1e-12)
        k = int(np.argmin(speeds))
        if speeds[k] <= floor:
            raise EqgeoError(
                f"vanishing metric speed ({speeds[k]:.3e}) near "
                f"t={ts[k]:g}; the curve is not regular there and cannot "
                "be arc-length reparametrized")

    def _speed_unchecked(self, t) -> float:
        x = self.base.eval(t)
        v = self.base.d1(t)
        g = self.manifold.metric_raw(x)
        return float(np.sqrt(max(float(v @ g @ v), 0.0)))

    def _speed(self, t) -> float:
        x = self.base.eval(t)
        v = self.base.d1(t)
        g = self.manifold.metric_raw(x)
        s2 = float(v @ g @ v)
        if s2 <= 1e-24:
            raise EqgeoError(
                f"vanishing metric speed at t={t:g}; the curve is not "
                "regular there and cannot be arc-length reparametrized")
        return np.sqrt(s2)

    def _arclen(self, t) -> float:
        i = int(np.searchsorted(self._edges, t, side="right") - 1)
        i = min(max(i, 0), len(self._edges) - 2)
        return self._prefix[i] + _gl_integrate(self._speed, self._edges[i], t)

    def t_of_s(self, s: float) -> float:
        s = float(np.clip(s, 0.0, self.length))
        i = int(np.searchsorted(self._prefix, s) - 1)
        i = min(max(i, 0), len(self._edges) - 2)
        frac = ((s - self._prefix[i])
                / max(self._prefix[i + 1] - self._prefix[i], 1e-300))
        t = self._edges[i] + frac * (self._edges[i + 1] - self._edges[i])
        lo, hi = self.base_span
        for _ in range(60):
            err = self._arclen(t) - s
            if abs(err) < 1e-13 * max(1.0, self.length):
                break
            t_next = t - err / self._speed(t)
            if not lo <= t_next <= hi:
                t_next = 0.5 * (t + (lo if err > 0 else hi))
            t = t_next
        return float(np.clip(t, lo, hi))

    def jets(self, s):
        t = self.t_of_s(s)
        x, v, a = self.base.jets(t)
        g = self.manifold.metric_raw(x)
        sigma2 = float(v @ g @ v)
        sigma = np.sqrt(sigma2)
        dg = metric_derivatives(self.manifold.immersion, x, engine="dual")
        # d(sigma^2)/dt = 2 a.g.v + sum_h (v.dg[h].v) v_h
        dsigma2 = 2.0 * float(a @ g @ v) + float(
            np.einsum("hij,i,j,h->", dg, v, v, v))
        dsigma = 0.5 * dsigma2 / sigma
        xd1 = v / sigma
        xd2 = (a - v * (dsigma / sigma)) / sigma2
        return x, xd1, xd2

    def eval(self, s):
        return self.base.eval(self.t_of_s(s))

    def d1(self, s):
        return self.jets(s)[1]

    def d2(self, s):
        return self.jets(s)[2]


def arc_length_reparametrize(manifold: Manifold, curve: ParamCurve,
                             tspan=None) -> ArcLengthCurve:
    """Reparametrize ``curve`` to unit metric speed over ``tspan``."""
    return ArcLengthCurve(manifold, curve, tspan=tspan)


# --------------------------------------------------------------------------
# Ambient normal test (hypersurfaces only)


def ambient_normal_test(hypersurface: ImmersionMap, curve: ParamCurve,
                        grid) -> float:
    """Max norm over the grid of the ambient curve acceleration component
    orthogonal to the hypersurface normal. Zero (to tolerance) iff the curve
    is a geodesic, provided it is parametrized by arc length."""
    n, m = hypersurface.dim_ambient, hypersurface.dim_param
    if n != m + 1:
        raise ValueError(
            f"unsupported: ambient normal test needs a hypersurface "
            f"(codimension 1), got n={n}, m={m}")
    worst = 0.0
    for t in np.asarray(grid, dtype=np.float64):
        x, v, a = curve.jets(t)
        hypersurface.box.require_interior(x)
        jac = hypersurface.jacobian(x)
        hes = hypersurface.second_derivs(x)
        u_mat, svals, _ = np.linalg.svd(jac, full_matrices=True)
        if svals[m - 1] < 1e-12 * max(svals[0], 1e-300):
            raise EqgeoError(f"degenerate normal at {tuple(x)}: immersion "
                             "Jacobian is rank deficient")
        nvec = u_mat[:, -1]
        acc = jac @ a + np.einsum("aij,i,j->a", hes, v, v)
        ortho = acc - float(acc @ nvec) * nvec
        worst = max(worst, float(np.linalg.norm(ortho)))
    return worst


# --------------------------------------------------------------------------
# Boundary value problem (single shooting)


def geodesic_bvp(manifold: Manifold, x_start, x_end, init_guess=None,
                 step: float = 2e-3, tol: float = 1e-7,
                 max_iter: int = 50) -> Trajectory:
    """Newton-adjusted shooting from x_start to x_end over unit time.

    Returns the connecting trajectory (endpoint error <= tol in parameter
    coordinates); its .length() is the geodesic length. Domain exits during
    shooting damp the Newton step by half. Raises ConvergenceError with the
    best iterate if the budget runs out.
    """
    x_start = np.asarray(x_start, dtype=np.float64)
    x_end = np.asarray(x_end, dtype=np.float64)
    manifold.box.require_interior(x_start)
    manifold.box.require_interior(x_end)
    m = manifold.dim

    def shoot(v0):
        traj = geodesic_ivp(manifold, x_start, v0, horizon=1.0, step=step)
        if traj.exited_domain:
            return None, traj
        return traj.endpoint - x_end, traj

    v = (np.asarray(init_guess, dtype=np.float64) if init_guess is not None
         else x_end - x_start)
    if not np.any(v):
        raise ValueError("start and end coincide; supply an initial guess")

    best_err = np.inf
    best_traj = None
    resid, traj = shoot(v)
    for _ in range(max_iter):
        if resid is not None:
            err = float(np.max(np.abs(resid)))
            if err < best_err:
                best_err, best_traj = err, traj
            if err <= tol:
                return traj
            jac = np.empty((m, m))
            ok = True
            for j in range(m):
                eps = 1e-6 * (1.0 + abs(v[j]))
                vp = v.copy()
                vp[j] += eps
                rp, _ = shoot(vp)
                if rp is None:
                    ok = False
                    break
                jac[:, j] = (rp - resid) / eps
            if not ok:
                delta = -0.5 * resid  # fall back to a crude contraction
            else:
                try:
                    delta = np.linalg.solve(jac, -resid)
                except np.linalg.LinAlgError:
                    raise ConvergenceError(
                        "singular shooting Jacobian", best=v,
                        residual=best_err) from None
        else:
            # previous shot left the domain: damp toward the chord guess
            delta = 0.5 * ((x_end - x_start) - v)
        scale = 1.0
        while True:
            resid2, traj2 = shoot(v + scale * delta)
            if resid2 is not None or scale < 1.0 / 1024.0:
                break
            scale *= 0.5  # domain exit: damped retry
        v = v + scale * delta
        resid, traj = resid2, traj2
    raise ConvergenceError(
        f"shooting failed to reach {tuple(x_end)} within {max_iter} "
        f"iterations (best endpoint error {best_err:.3e})",
        best=best_traj, residual=best_err)
