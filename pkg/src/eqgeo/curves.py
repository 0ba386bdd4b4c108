"""Price-income curves t -> (p(t), w(t)) on the price-income equilibrium set.

Two sources: analytic expressions (exact derivatives via symbolic
differentiation), and economies (pointwise Newton solutions with
Richardson-extrapolated central-difference derivatives). Both expose the
same jet interface consumed by the equilibrium manifolds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .economy import Economy, solve_price_income
from .errors import ConvergenceError, CurvePositivityError
from .expr import CurveExpression, parse_curve_expr

POSITIVITY_SAMPLES = 1024


@dataclass(frozen=True)
class CurveJet:
    """Values and first two derivatives of (p, w) at one parameter value."""

    t: float
    p: np.ndarray
    dp: np.ndarray
    ddp: np.ndarray
    w: float
    dw: float
    ddw: float


class PriceIncomeCurve:
    """Base interface: L goods (L-1 head prices) over a parameter interval."""

    L: int
    tspan: tuple

    def jet(self, t: float) -> CurveJet:
        raise NotImplementedError

    def p(self, t: float) -> np.ndarray:
        return self.jet(t).p

    def w(self, t: float) -> float:
        return self.jet(t).w

    def grid_jets(self, ts) -> list:
        return [self.jet(float(t)) for t in np.asarray(ts)]

    def positivity_violation(self, samples: int = POSITIVITY_SAMPLES):
        """First sampled (t, j, p_j) with p_j <= 0, or None if all positive."""
        for t in np.linspace(self.tspan[0], self.tspan[1], samples):
            pvals = self.p(float(t))
            for j, pj in enumerate(pvals):
                if pj <= 0.0:
                    return float(t), j, float(pj)
        return None

    def require_positive(self, samples: int = POSITIVITY_SAMPLES):
        hit = self.positivity_violation(samples)
        if hit is not None:
            t, j, pj = hit
            raise CurvePositivityError(
                f"price component {j} is {pj:g} <= 0 at t={t:g} inside the "
                f"declared domain [{self.tspan[0]:g}, {self.tspan[1]:g}]",
                t=t, component=j)

    def max_price_derivative(self, ts) -> float:
        """max_j max_t |p_j'(t)| over the grid: the price-constancy score."""
        worst = 0.0
        for jet in self.grid_jets(ts):
            if len(jet.dp):
                worst = max(worst, float(np.max(np.abs(jet.dp))))
        return worst


class ExprPriceCurve(PriceIncomeCurve):
    """Head prices and income given as curve expressions in t."""

    def __init__(self, p_exprs, w_expr, tspan, name: str = ""):
        self.p_exprs = tuple(
            parse_curve_expr(e) if isinstance(e, str) else e
            for e in p_exprs)
        self.w_expr = (parse_curve_expr(w_expr) if isinstance(w_expr, str)
                       else w_expr)
        self.L = len(self.p_exprs) + 1
        self.tspan = (float(tspan[0]), float(tspan[1]))
        self.name = name or "analytic-curve"

    def jet(self, t: float) -> CurveJet:
        t = float(t)
        jets = np.asarray([e.jet(t) for e in self.p_exprs], dtype=np.float64)
        jets = jets.reshape(-1, 3)
        wv, wd, wdd = self.w_expr.jet(t)
        return CurveJet(t=t, p=jets[:, 0].copy(), dp=jets[:, 1].copy(),
                        ddp=jets[:, 2].copy(), w=wv, dw=wd, ddw=wdd)

    def grid_jets(self, ts):
        ts = np.asarray(ts, dtype=np.float64)
        pj = [e.grid(ts) for e in self.p_exprs]
        wv, wd, wdd = self.w_expr.grid(ts)
        out = []
        for k, t in enumerate(ts):
            out.append(CurveJet(
                t=float(t),
                p=np.array([g[0][k] for g in pj]),
                dp=np.array([g[1][k] for g in pj]),
                ddp=np.array([g[2][k] for g in pj]),
                w=float(wv[k]), dw=float(wd[k]), ddw=float(wdd[k])))
        return out


class ConstantPriceCurve(ExprPriceCurve):
    """Constant head prices with an arbitrary income path."""

    def __init__(self, p_values, w_expr, tspan, name: str = ""):
        exprs = [CurveExpression(repr(float(v))) for v in p_values]
        super().__init__(exprs, w_expr, tspan,
                         name=name or "constant-price")


class EconomyPriceCurve(PriceIncomeCurve):
    """Curve traced by the Newton solver across income shares.

    Derivatives are Richardson-extrapolated central differences of the
    solved prices (base step ``h``, paired with 2h so the leading h^2 error
    cancels); solutions are cached per parameter value since stencil
    evaluations revisit the same offsets constantly.

    The default base step balances truncation against the solver noise
    floor: second differences amplify the ~1e-15 Newton residual by 4/h^2,
    so h = 1e-3 keeps second-derivative noise near 1e-9 while Richardson
    holds the truncation at O(h^4).
    """

    def __init__(self, economy: Economy, tspan=(0.05, 0.95), h: float = 1e-3,
                 chart: str = "share", name: str = ""):
        if chart not in ("share", "logit"):
            raise ValueError("chart must be 'share' or 'logit'")
        self.economy = economy
        self.L = economy.L
        self.chart = chart
        self.tspan = (float(tspan[0]), float(tspan[1]))
        self.h = float(h)
        self.name = name or f"economy-curve({chart})"
        self._cache: dict = {}

    def _share(self, t: float) -> float:
        if self.chart == "share":
            return t
        return 1.0 / (1.0 + np.exp(-t))  # logit chart maps R onto (0,1)

    def _solve(self, t: float):
        key = float(t)
        hit = self._cache.get(key)
        if hit is None:
            share = self._share(key)
            try:
                p_head, w1 = solve_price_income(self.economy, share)
            except ConvergenceError:
                # continuation fallback: restart from the nearest solved
                # point instead of uniform prices
                if not self._cache:
                    raise
                nearest = min(self._cache, key=lambda s: abs(s - key))
                p_head, w1 = solve_price_income(
                    self.economy, share, p_head_guess=self._cache[nearest][0])
            hit = (p_head, w1)
            self._cache[key] = hit
        return hit

    def values(self, t: float):
        p_head, w1 = self._solve(t)
        return p_head.copy(), w1

    def jet(self, t: float) -> CurveJet:
        t = float(t)
        h = self.h

        def pw(tt):
            p_head, w1 = self._solve(tt)
            return np.concatenate([p_head, [w1]])

        f0 = pw(t)
        fp1, fm1 = pw(t + h), pw(t - h)
        fp2, fm2 = pw(t + 2 * h), pw(t - 2 * h)
        d_h = (fp1 - fm1) / (2 * h)
        d_2h = (fp2 - fm2) / (4 * h)
        d1 = (4.0 * d_h - d_2h) / 3.0
        s_h = (fp1 - 2 * f0 + fm1) / (h * h)
        s_2h = (fp2 - 2 * f0 + fm2) / (4 * h * h)
        d2 = (4.0 * s_h - s_2h) / 3.0
        return CurveJet(t=t, p=f0[:-1], dp=d1[:-1], ddp=d2[:-1],
                        w=float(f0[-1]), dw=float(d1[-1]), ddw=float(d2[-1]))


class ReparametrizedPriceCurve(PriceIncomeCurve):
    """base(tau(t)) for a smooth time change with supplied derivatives."""

    def __init__(self, base: PriceIncomeCurve, tau, dtau, ddtau, tspan,
                 name: str = ""):
        self.base = base
        self.tau = tau
        self.dtau = dtau
        self.ddtau = ddtau
        self.L = base.L
        self.tspan = (float(tspan[0]), float(tspan[1]))
        self.name = name or "reparametrized-curve"

    def jet(self, t: float) -> CurveJet:
        u = self.tau(t)
        du = self.dtau(t)
        ddu = self.ddtau(t)
        j = self.base.jet(u)
        return CurveJet(
            t=float(t),
            p=j.p, dp=j.dp * du, ddp=j.ddp * du * du + j.dp * ddu,
            w=j.w, dw=j.dw * du, ddw=j.ddw * du * du + j.dw * ddu)


@dataclass
class SampledBCurve:
    """Grid view of a price-income curve: solved values plus derivative
    estimates at the nodes, with a second-difference smoothness score."""

    ts: np.ndarray
    p: np.ndarray    # (n, L-1)
    w: np.ndarray    # (n,)
    dp: np.ndarray
    dw: np.ndarray
    max_second_difference: float

    def to_rows(self):
        for k in range(len(self.ts)):
            yield (self.ts[k], self.p[k], self.dp[k], self.w[k], self.dw[k])


def sample_B_curve(economy: Economy, t_grid, h: float = 1e-4,
                   chart: str = "share") -> SampledBCurve:
    """Solve the economy across the grid and attach derivative estimates.

    Raises with the offending grid point if any solve fails; flags rough
    grids via the max scaled second difference of the solved prices.
    """
    curve = EconomyPriceCurve(economy, tspan=(min(t_grid), max(t_grid)),
                              h=h, chart=chart)
    ts = np.asarray(t_grid, dtype=np.float64)
    p_rows, w_rows, dp_rows, dw_rows = [], [], [], []
    for t in ts:
        try:
            jet = curve.jet(float(t))
        except Exception as exc:
            raise type(exc)(f"B(r) curve solve failed at t={float(t)!r}: "
                            f"{exc}") from exc
        p_rows.append(jet.p)
        w_rows.append(jet.w)
        dp_rows.append(jet.dp)
        dw_rows.append(jet.dw)
    p = np.asarray(p_rows)
    w = np.asarray(w_rows)
    if len(ts) >= 3:
        dt = np.diff(ts)
        second = np.abs(np.diff(p, n=2, axis=0)) / (
            dt[:-1, None] * dt[1:, None])
        smooth = float(np.max(second)) if second.size else 0.0
    else:
        smooth = 0.0
    return SampledBCurve(ts=ts, p=p, w=w, dp=np.asarray(dp_rows),
                         dw=np.asarray(dw_rows),
                         max_second_difference=smooth)
