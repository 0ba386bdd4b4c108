"""Two-consumer exchange economies: demand systems, excess demand, and the
equilibrium solvers that trace out the price-income curve and count
equilibria over endowment fibers.

Prices are normalized so the last good is the numeraire (p_L = 1); solvers
operate on the first L-1 prices in log space, which keeps them positive by
construction. The chart on the price-income set is consumer 1's income share
t in (0,1): the solver enforces w_1 = t * (p . r) at every iterate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError

WALRAS_TOL = 1e-10
ROOT_SEPARATION = 1e-6


@dataclass(frozen=True)
class Preference:
    """Cobb-Douglas or CES preferences with expenditure shares ``alpha``.

    ``rho`` is the CES exponent, in (-inf, 1) excluding 0; Cobb-Douglas is
    the rho -> 0 limit and is handled in closed form.
    """

    kind: str
    alpha: np.ndarray
    rho: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha",
                           np.asarray(self.alpha, dtype=np.float64))
        if self.kind not in ("cobb_douglas", "ces"):
            raise ValueError(f"unknown preference kind {self.kind!r}")
        if np.any(self.alpha <= 0):
            raise ValueError("alpha must be strictly positive")
        if abs(float(np.sum(self.alpha)) - 1.0) > 1e-12:
            raise ValueError("alpha must sum to 1 (tolerance 1e-12)")
        if self.kind == "ces":
            if self.rho is None or not (self.rho < 1.0) or self.rho == 0.0:
                raise ValueError("CES needs rho < 1, rho != 0")
        object.__setattr__(self, "rho",
                           None if self.kind == "cobb_douglas"
                           else float(self.rho))


def demand(pref: Preference, p, w):
    """Marshallian demand at prices p > 0 and income w > 0.

    Cobb-Douglas: x_l = alpha_l w / p_l.
    CES:          x_l = (alpha_l/p_l)^(1/(1-rho)) w / sum_k p_k (alpha_k/p_k)^(1/(1-rho)).

    Broadcasts over a trailing grid axis when p has shape (G, L) and w has
    shape (G,).
    """
    p = np.asarray(p, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if np.any(p <= 0):
        raise ValueError("prices must be strictly positive")
    if np.any(w <= 0):
        raise ValueError("income must be strictly positive")
    if pref.kind == "cobb_douglas":
        return pref.alpha * w[..., None] / p if p.ndim == 2 \
            else pref.alpha * w / p
    b = 1.0 / (1.0 - pref.rho)
    a = (pref.alpha / p) ** b
    denom = np.sum(p * a, axis=-1)
    if p.ndim == 2:
        return a * (w / denom)[:, None]
    return a * (w / denom)


@dataclass(frozen=True)
class Economy:
    """L goods, exactly two consumers, fixed total resources r > 0.

    ``omega1`` (consumer 1's endowment, componentwise within [0, r] and not
    a corner) is optional; it is only needed for fiber computations such as
    equilibrium counting.
    """

    L: int
    preferences: tuple
    r: np.ndarray
    omega1: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=np.float64))
        prefs = tuple(self.preferences)
        object.__setattr__(self, "preferences", prefs)
        if len(prefs) != 2:
            raise ValueError("exactly two consumers are supported")
        if len(self.r) != self.L or np.any(self.r <= 0):
            raise ValueError("total resources must be strictly positive "
                             f"with {self.L} components")
        for pref in prefs:
            if len(pref.alpha) != self.L:
                raise ValueError("preference dimension mismatch")
        if self.omega1 is not None:
            om = np.asarray(self.omega1, dtype=np.float64)
            object.__setattr__(self, "omega1", om)
            if len(om) != self.L or np.any(om < 0) or np.any(om > self.r):
                raise ValueError("omega1 must lie componentwise in [0, r]")
            if not (np.any(om > 0) and np.any(om < self.r)):
                raise ValueError("omega1 must leave both consumers with "
                                 "positive income at positive prices")

    @property
    def omega2(self):
        return None if self.omega1 is None else self.r - self.omega1


def excess_demand(economy: Economy, p, w1: float) -> np.ndarray:
    """Aggregate excess demand Z(p, w1) with consumer 2's income p.r - w1.

    Walras' law p . Z = 0 holds identically (both demands satisfy their
    budget identities)."""
    p = np.asarray(p, dtype=np.float64)
    total = float(p @ economy.r)
    w1 = float(w1)
    if not 0.0 < w1 < total:
        raise ValueError(f"income w1={w1:g} outside (0, p.r={total:g})")
    d1 = demand(economy.preferences[0], p, w1)
    d2 = demand(economy.preferences[1], p, total - w1)
    return d1 + d2 - economy.r


def _newton_on_head_prices(economy: Economy, residual_fn, q0,
                           max_iter: int = 100):
    """Damped Newton in log head-prices; residual_fn maps q -> R^{L-1}."""
    q = np.asarray(q0, dtype=np.float64).copy()
    n = len(q)
    scale = max(1.0, float(np.max(economy.r)))
    best = None
    for it in range(max_iter):
        F = residual_fn(q)
        err = float(np.max(np.abs(F)))
        if best is None or err < best[0]:
            best = (err, q.copy())
        if err <= 1e-13 * scale:
            return q
        jac = np.empty((n, n))
        for j in range(n):
            eps = 1e-7 * (1.0 + abs(q[j]))
            qp = q.copy()
            qp[j] += eps
            jac[:, j] = (residual_fn(qp) - F) / eps
        try:
            delta = np.linalg.solve(jac, -F)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian in the price solver",
                                   best=np.exp(q), residual=err) from None
        # keep log-price moves bounded; equilibria of interest are O(1)
        delta = np.clip(delta, -2.0, 2.0)
        q = q + delta
        if float(np.max(np.abs(delta))) < 1e-15:
            F = residual_fn(q)
            if float(np.max(np.abs(F))) <= 1e-13 * scale:
                return q
    err, qb = best
    if err <= 1e-10 * scale:  # converged to spec tolerance, not machine
        return qb
    raise ConvergenceError(
        f"price solver stalled at residual {err:.3e}",
        best=np.exp(qb), residual=err)


def solve_price_income(economy: Economy, t: float, p_head_guess=None):
    """Equilibrium head prices and consumer 1 income at income share t.

    Solves the first L-1 excess demand components (the last follows by
    Walras' law) with w1 = t * (p . r) refreshed at every iterate. Returns
    (p_head, w1) with p_head strictly positive and residual <= 1e-10.
    Starts from uniform prices unless a guess is given (continuation).
    """
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ValueError(f"income share t={t:g} must lie in (0, 1)")

    def residual(q):
        p = np.concatenate([np.exp(q), [1.0]])
        w1 = t * float(p @ economy.r)
        return excess_demand(economy, p, w1)[:economy.L - 1]

    q0 = np.zeros(economy.L - 1) if p_head_guess is None \
        else np.log(np.asarray(p_head_guess, dtype=np.float64))
    q = _newton_on_head_prices(economy, residual, q0)
    p = np.concatenate([np.exp(q), [1.0]])
    w1 = t * float(p @ economy.r)
    return np.exp(q), w1


def solve_fiber_price(economy: Economy, p_head_guess=None):
    """Equilibrium head prices when incomes come from the endowments
    (w_i = p . omega_i); requires ``omega1``."""
    if economy.omega1 is None:
        raise ValueError("economy has no endowment omega1")

    def residual(q):
        p = np.concatenate([np.exp(q), [1.0]])
        w1 = float(p @ economy.omega1)
        return excess_demand(economy, p, w1)[:economy.L - 1]

    q0 = np.zeros(economy.L - 1) if p_head_guess is None \
        else np.log(np.asarray(p_head_guess, dtype=np.float64))
    q = _newton_on_head_prices(economy, residual, q0)
    return np.exp(q)


# --------------------------------------------------------------------------
# Equilibrium counting on the normalized price line (L = 2)


@dataclass
class EquilibriumSet:
    """Distinct equilibria of one endowment fiber (L = 2 scan)."""

    endowment: np.ndarray
    roots: list            # [(p1, residual_norm), ...] sorted by p1
    count: int
    censored: bool         # a root sat at the scan boundary
    even_count_suspect: bool = field(default=False)

    @property
    def prices(self):
        return [r[0] for r in self.roots]


def excess_good1_on_grid(economy: Economy, p1s: np.ndarray) -> np.ndarray:
    """Vectorized Z_1(p1) over a grid, incomes from the endowments."""
    if economy.L != 2:
        raise ValueError("the price-line scan requires L = 2")
    if economy.omega1 is None:
        raise ValueError("economy has no endowment omega1")
    p = np.column_stack([p1s, np.ones_like(p1s)])
    w1 = p @ economy.omega1
    w2 = p @ economy.omega2
    d1 = demand(economy.preferences[0], p, w1)
    d2 = demand(economy.preferences[1], p, w2)
    return d1[:, 0] + d2[:, 0] - economy.r[0]


def count_equilibria(economy: Economy, n_grid: int = 4001,
                     p_range=(1e-3, 1e3)) -> EquilibriumSet:
    """Scan Z_1 over a log-spaced grid of normalized prices, bracket sign
    changes, and polish each bracket with brentq + Newton.

    Regular economies have an odd number of equilibria; an even count is
    flagged as a scan failure rather than trusted.
    """
    grid = np.geomspace(p_range[0], p_range[1], n_grid)
    z = excess_good1_on_grid(economy, grid)

    def z1(p1):
        return float(excess_good1_on_grid(economy, np.array([p1]))[0])

    roots = []
    for i in range(len(grid) - 1):
        a, b = z[i], z[i + 1]
        if a == 0.0:
            roots.append(grid[i])
            continue
        if a * b < 0.0:
            roots.append(brentq(z1, grid[i], grid[i + 1], xtol=1e-15,
                                rtol=8.9e-16))
    if z[-1] == 0.0:
        roots.append(grid[-1])

    polished = []
    for root in roots:
        p1 = root
        for _ in range(40):  # Newton to machine precision
            f = z1(p1)
            if f == 0.0:
                break
            eps = 1e-7 * (1.0 + p1)
            df = (z1(p1 + eps) - f) / eps
            if df == 0.0:
                break
            step_ = f / df
            if abs(step_) < 1e-16 * p1:
                break
            p1 -= step_
        polished.append(p1)

    distinct = []
    for p1 in sorted(polished):
        if not distinct or abs(p1 - distinct[-1]) > ROOT_SEPARATION * max(
                1.0, abs(p1)):
            distinct.append(p1)
    roots_out = [(p1, abs(z1(p1))) for p1 in distinct]
    censored = bool(distinct) and (
        distinct[0] <= grid[1] or distinct[-1] >= grid[-2])
    return EquilibriumSet(
        endowment=np.asarray(economy.omega1), roots=roots_out,
        count=len(distinct), censored=censored,
        even_count_suspect=(len(distinct) % 2 == 0))
