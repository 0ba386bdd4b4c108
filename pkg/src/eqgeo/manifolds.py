"""Equilibrium manifolds of two-consumer economies and their closed forms.

For L goods the manifold is the image of

    Phi(t, a_1..a_{L-1}) = (p_1(t)..p_{L-1}(t), a_1..a_{L-1},
                            w(t) - sum_j p_j(t) a_j)

in R^{2L-1}: an L-dimensional ruled submanifold swept by affine alpha-slices
along the price-income curve. Its Christoffel symbols have closed forms in
the curve jets through the quantities

    A  = w' - sum_j p_j' a_j          B = sum_j (p_j')^2
    C  = sum_j p_j' p_j''             |p|^2 = 1 + sum_j p_j^2
    A' = w'' - sum_j p_j'' a_j        D = |p|^2 B + A^2

with every symbol carrying two spatial lower indices identically zero.

Also here: the flat-but-not-a-hyperplane ruled hypersurface counterexample
and the sign-crossing-price counterexample (JSON kinds "remark2"/"remark1").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ExprPriceCurve, PriceIncomeCurve
from .diffgeo import ChristoffelSymbols, Manifold
from .errors import SingularPointError
from .geodesic import LineCurve
from .immersion import AnalyticImmersion, Box, ImmersionMap

DEFAULT_ALPHA_SPAN = (-2.0, 2.0)
DENOM_FLOOR = 1e-14


@dataclass(frozen=True)
class BoxedQuantities:
    """The scalar building blocks of the closed-form symbols at one point."""

    A: float
    B: float
    C: float
    price_norm_sq: float
    A_prime: float
    denom: float


class EquilibriumImmersion(ImmersionMap):
    """Phi and its exact derivatives assembled from the curve jets."""

    def __init__(self, curve: PriceIncomeCurve, box: Box, name: str = ""):
        self.curve = curve
        self.box = box
        self.dim_param = curve.L
        self.dim_ambient = 2 * curve.L - 1
        self.name = name or "equilibrium-m2"

    def _split(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(x[0]), x[1:]

    def eval(self, x):
        t, alpha = self._split(x)
        jet = self.curve.jet(t)
        return np.concatenate([jet.p, alpha,
                               [jet.w - float(jet.p @ alpha)]])

    def jacobian(self, x):
        t, alpha = self._split(x)
        jet = self.curve.jet(t)
        L = self.curve.L
        jac = np.zeros((self.dim_ambient, L))
        jac[:L - 1, 0] = jet.dp
        jac[L - 1:2 * L - 2, 1:] = np.eye(L - 1)
        jac[-1, 0] = jet.dw - float(jet.dp @ alpha)
        jac[-1, 1:] = -jet.p
        return jac

    def second_derivs(self, x):
        t, alpha = self._split(x)
        jet = self.curve.jet(t)
        L = self.curve.L
        hes = np.zeros((self.dim_ambient, L, L))
        hes[:L - 1, 0, 0] = jet.ddp
        hes[-1, 0, 0] = jet.ddw - float(jet.ddp @ alpha)
        hes[-1, 0, 1:] = -jet.dp
        hes[-1, 1:, 0] = -jet.dp
        return hes

    def metric(self, x):
        # closed form: g_00 = B + A^2, g_0j = -A p_j, g_ij = I + p p^T
        t, alpha = self._split(x)
        jet = self.curve.jet(t)
        L = self.curve.L
        a_val = jet.dw - float(jet.dp @ alpha)
        g = np.empty((L, L))
        g[0, 0] = float(jet.dp @ jet.dp) + a_val * a_val
        g[0, 1:] = -a_val * jet.p
        g[1:, 0] = g[0, 1:]
        g[1:, 1:] = np.eye(L - 1) + np.outer(jet.p, jet.p)
        return g


def boxed_quantities(curve: PriceIncomeCurve, t: float,
                     alpha) -> BoxedQuantities:
    alpha = np.asarray(alpha, dtype=np.float64)
    jet = curve.jet(float(t))
    a_val = jet.dw - float(jet.dp @ alpha)
    b_val = float(jet.dp @ jet.dp)
    c_val = float(jet.dp @ jet.ddp)
    norm_sq = 1.0 + float(jet.p @ jet.p)
    a_prime = jet.ddw - float(jet.ddp @ alpha)
    return BoxedQuantities(A=a_val, B=b_val, C=c_val,
                           price_norm_sq=norm_sq, A_prime=a_prime,
                           denom=norm_sq * b_val + a_val * a_val)


class EquilibriumManifoldM2(Manifold):
    """The manifold of a fixed price-income curve, with closed-form symbols.

    ``gamma`` evaluates the closed forms (the stencil argument is ignored:
    nothing is differenced). The generic finite-difference route stays
    available through christoffel_from_metric on ``immersion``.
    """

    kind = "equilibrium_m2"

    def __init__(self, curve: PriceIncomeCurve, alpha_span=DEFAULT_ALPHA_SPAN,
                 name: str = "", positivity_exempt: bool = False):
        L = curve.L
        lo = (curve.tspan[0],) + tuple(alpha_span[0] for _ in range(L - 1))
        hi = (curve.tspan[1],) + tuple(alpha_span[1] for _ in range(L - 1))
        box = Box(lo, hi)
        super().__init__(EquilibriumImmersion(curve, box, name=name),
                         name=name or f"E(r)[{getattr(curve, 'name', '?')}]")
        self.curve = curve
        self.L = L
        self.positivity_exempt = positivity_exempt
        self.economy = None  # set when the curve is solved from an economy

    def gamma(self, x, stencil: float | None = None) -> np.ndarray:
        return closed_form_christoffel_M2(self, x).gamma

    def gamma_stencil_margin(self, stencil: float | None = None) -> float:
        return 0.0  # closed form, no stencil

    def boxed(self, t: float, alpha) -> BoxedQuantities:
        return boxed_quantities(self.curve, t, alpha)


def assemble_phi(curve: PriceIncomeCurve, alpha_span=DEFAULT_ALPHA_SPAN,
                 name: str = "", validate_positivity: bool = True,
                 positivity_exempt: bool = False) -> EquilibriumManifoldM2:
    """Build the manifold of a price-income curve.

    Rejects curves whose prices fail strict positivity anywhere on the
    declared parameter interval (sampled audit), carrying the violating t.
    """
    if validate_positivity:
        curve.require_positive()
    return EquilibriumManifoldM2(curve, alpha_span=alpha_span, name=name,
                                 positivity_exempt=positivity_exempt)


def closed_form_christoffel_M2(manifold: EquilibriumManifoldM2,
                               point) -> ChristoffelSymbols:
    """Closed-form symbols at (t, alpha).

    Gamma^0_00 = (|p|^2 C + A A') / D      Gamma^k_00 = p_k (A C - A' B) / D
    Gamma^0_0j = -p_j' A / D               Gamma^k_0j = p_j' p_k B / D

    and every symbol with two spatial lower indices vanishes identically.
    Fails on a degenerate curve point (D = |p|^2 B + A^2 = 0, i.e. p' = 0
    and A = 0).
    """
    point = np.asarray(point, dtype=np.float64)
    t, alpha = float(point[0]), point[1:]
    jet = manifold.curve.jet(t)
    q = boxed_quantities(manifold.curve, t, alpha)
    if q.denom <= DENOM_FLOOR:
        raise SingularPointError(
            f"closed-form Christoffel denominator |p|^2 B + A^2 = "
            f"{q.denom:.3e} vanishes at (t, alpha) = ({t:g}, {tuple(alpha)})"
            "; the curve is degenerate there (p' = 0 and A = 0)")
    L = manifold.L
    gamma = np.zeros((L, L, L))
    gamma[0, 0, 0] = (q.price_norm_sq * q.C + q.A * q.A_prime) / q.denom
    coef = (q.A * q.C - q.A_prime * q.B) / q.denom
    gamma[1:, 0, 0] = jet.p * coef
    gamma[0, 0, 1:] = -jet.dp * q.A / q.denom
    gamma[0, 1:, 0] = gamma[0, 0, 1:]
    block = np.outer(jet.p, jet.dp) * (q.B / q.denom)  # [k-1, j-1]
    gamma[1:, 0, 1:] = block
    gamma[1:, 1:, 0] = block  # same [k, j] entry: symmetry in (i, j)
    return ChristoffelSymbols(point=point, gamma=gamma)


def normal_vector_L2(manifold: EquilibriumManifoldM2, t: float,
                     alpha: float) -> np.ndarray:
    """Surface normal (p' a - w', p p', p') of the L = 2 manifold in R^3."""
    if manifold.L != 2:
        raise ValueError("unsupported: the normal formula needs L = 2")
    jet = manifold.curve.jet(float(t))
    p, dp, dw = float(jet.p[0]), float(jet.dp[0]), jet.dw
    return np.array([dp * float(alpha) - dw, p * dp, dp])


def ruled_decomposition_check(manifold: Manifold, points=None, n: int = 64,
                              seed: int = 0, tol: float = 1e-10):
    """Is the immersion affine in every spatial parameter?

    Measures max |Phi(t,a) - Phi(t,0) - sum_j a_j (Phi(t,e_j) - Phi(t,0))|
    over sampled parameter points (the spatial origin and unit points are
    rescaled into the box when it does not contain them). True iff the
    defect stays within ``tol``.
    """
    f = manifold.immersion
    m = f.dim_param
    box = f.box
    if points is None:
        rng = np.random.default_rng(seed)
        points = box.sample(rng, n)
    # reference spatial points: origin and unit vectors, squeezed into the
    # box if necessary
    base = np.zeros(m - 1)
    scale = np.ones(m - 1)
    for j in range(m - 1):
        lo, hi = box.lo[j + 1], box.hi[j + 1]
        if not lo < 0.0 < hi:
            base[j] = 0.5 * (lo + hi)
        room = min(hi - base[j], base[j] - lo)
        scale[j] = 1.0 if base[j] + 1.0 < hi else 0.5 * room
    defect = 0.0
    for x in np.asarray(points, dtype=np.float64):
        t, alpha = float(x[0]), x[1:]
        anchor = np.concatenate([[t], base])
        f0 = f.eval(anchor)
        pred = f0.copy()
        for j in range(m - 1):
            ej = anchor.copy()
            ej[1 + j] += scale[j]
            pred = pred + (alpha[j] - base[j]) / scale[j] * (f.eval(ej) - f0)
        defect = max(defect, float(np.max(np.abs(f.eval(x) - pred))))
    return defect <= tol, defect


def coordinate_curves(manifold: Manifold, tspan=None):
    """The L parameter-space curves t -> (t, base) through the spatial base
    points {0, e_1, .., e_{L-1}} (clipped into the box when needed)."""
    m = manifold.dim
    box = manifold.box
    if tspan is None:
        tspan = (box.lo[0], box.hi[0])
    e0 = np.zeros(m)
    e0[0] = 1.0
    curves = []
    for j in range(m):
        base = np.zeros(m)
        if j > 0:
            base[j] = 1.0 if box.lo[j] < 1.0 < box.hi[j] \
                else 0.5 * (box.lo[j] + box.hi[j])
        curves.append(LineCurve(base, e0, tspan))
    return curves


def alpha_line(manifold: Manifold, t0: float, j: int, span=None) -> LineCurve:
    """The ruling line through (t0, 0) along spatial direction j (1-based
    among parameters: j in 1..L-1); always a geodesic on ruled manifolds."""
    m = manifold.dim
    if not 1 <= j <= m - 1:
        raise ValueError(f"spatial direction j must be in 1..{m - 1}")
    if span is None:
        span = (manifold.box.lo[j], manifold.box.hi[j])
    base = np.zeros(m)
    base[0] = t0
    direction = np.zeros(m)
    direction[j] = 1.0
    return LineCurve(base, direction, span)


def manifold_from_economy(economy, tspan=(0.1, 0.9),
                          alpha_span=DEFAULT_ALPHA_SPAN,
                          name: str = "") -> EquilibriumManifoldM2:
    """Solve the economy's price-income curve and build its manifold."""
    from .curves import EconomyPriceCurve
    curve = EconomyPriceCurve(economy, tspan=tspan)
    man = assemble_phi(curve, alpha_span=alpha_span,
                       name=name or "E(r)[economy]")
    man.economy = economy
    return man


# --------------------------------------------------------------------------
# Counterexamples


def remark1_manifold(L: int, constants, w="1",
                     tspan=(-1.0, 1.0)) -> EquilibriumManifoldM2:
    """Positivity-violating manifold: constant head prices except the last,
    which equals t itself (so it crosses zero inside the default domain).

    All L coordinate curves are geodesics when w is affine, yet the last
    price varies with unit slope: the constant-price conclusion fails
    exactly because strict positivity fails.
    """
    constants = [float(c) for c in constants]
    if len(constants) != L - 2:
        raise ValueError(f"need L-2 = {L - 2} constant head prices")
    if any(c <= 0 for c in constants):
        raise ValueError("the constant prices must be positive")
    exprs = [repr(c) for c in constants] + ["t"]
    curve = ExprPriceCurve(exprs, w, tspan, name="remark1-curve")
    man = assemble_phi(curve, name=f"remark1(L={L})",
                       validate_positivity=False, positivity_exempt=False)
    man.kind = "remark1"
    return man


class RuledHypersurface(Manifold):
    """F(t, a) = (a_1..a_{L-1}, g1(t), g2(t)) in R^{L+1}: a flat ruled
    hypersurface that is a hyperplane only when the profile is a line."""

    kind = "remark2"

    def __init__(self, L: int, gamma1, gamma2, tspan=(0.0, 1.0),
                 alpha_span=DEFAULT_ALPHA_SPAN):
        if L < 2:
            raise ValueError("need L >= 2")
        self.L = L
        varnames = ("t",) + tuple(f"a{j}" for j in range(1, L))
        comps = [f"a{j}" for j in range(1, L)]
        g1 = gamma1 if isinstance(gamma1, str) else gamma1.source
        g2 = gamma2 if isinstance(gamma2, str) else gamma2.source
        comps += [g1, g2]
        lo = (tspan[0],) + tuple(alpha_span[0] for _ in range(L - 1))
        hi = (tspan[1],) + tuple(alpha_span[1] for _ in range(L - 1))
        immersion = AnalyticImmersion(comps, varnames, Box(lo, hi),
                                      name=f"remark2(L={L})")
        # exact metric derivatives: residuals and curvature stay clean at
        # the domain walls where central stencils would fall out
        super().__init__(immersion, name=f"remark2(L={L})", engine="dual")
        self.profile = (g1, g2)
        self._check_regular()

    def _check_regular(self):
        from .expr import parse_curve_expr
        g1 = parse_curve_expr(self.profile[0])
        g2 = parse_curve_expr(self.profile[1])
        ts = np.linspace(self.box.lo[0], self.box.hi[0], 257)
        for t in ts:
            d1 = g1.jet(float(t))[1]
            d2 = g2.jet(float(t))[1]
            if d1 * d1 + d2 * d2 <= 1e-20:
                raise ValueError(
                    f"degenerate profile: (g1', g2') vanishes at t={t:g}")

    def normal_direction(self, x) -> np.ndarray:
        """Unit ambient normal at a parameter point (sign-normalized)."""
        jac = self.immersion.jacobian(x)
        u, s, _ = np.linalg.svd(jac, full_matrices=True)
        n = u[:, -1]
        lead = n[np.argmax(np.abs(n))]
        return n if lead >= 0 else -n

    def hyperplane_spread(self, count: int = 33) -> float:
        """Max angle (radians) between sampled normals; > 0 means the image
        spans no hyperplane."""
        ts = np.linspace(self.box.lo[0], self.box.hi[0], count)
        m = self.dim
        normals = []
        for t in ts:
            x = np.zeros(m)
            x[0] = t
            normals.append(self.normal_direction(x))
        worst = 0.0
        for i in range(len(normals)):
            for j in range(i + 1, len(normals)):
                c = float(np.clip(abs(normals[i] @ normals[j]), -1.0, 1.0))
                worst = max(worst, float(np.arccos(c)))
        return worst


def remark2_hypersurface(L: int, gamma1="cos(t)", gamma2="sin(t)",
                         tspan=(0.0, 1.0)) -> RuledHypersurface:
    """The flat ruled hypersurface counterexample over a plane profile."""
    return RuledHypersurface(L, gamma1, gamma2, tspan=tspan)
