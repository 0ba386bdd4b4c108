"""Numerical Riemannian geometry on equilibrium manifolds of two-consumer
exchange economies: metrics, Christoffel symbols, curvature, geodesics, and
the verification harness for the finite-geodesic-property / constant-price
relationship and its counterexamples.
"""

from ._backend import backend_name
from .curves import (ConstantPriceCurve, CurveJet, EconomyPriceCurve,
                     ExprPriceCurve, PriceIncomeCurve, sample_B_curve)
from .diffgeo import (ChristoffelSymbols, CurvatureReport, Manifold,
                      MetricTensor, christoffel_from_metric, induced_metric,
                      jacobian, metric_derivatives, riemann_tensor,
                      sectional_curvature)
from .economy import (Economy, EquilibriumSet, Preference, count_equilibria,
                      demand, excess_demand, solve_fiber_price,
                      solve_price_income)
from .expr import CurveExpression, parse_curve_expr
from .fgp import (CorollaryDashboard, FgpReport, check_fgp,
                  corollary_dashboard, price_constancy)
from .geodesic import (ArcLengthCurve, ExprCurve, GEODESIC_TOL, LineCurve,
                       ParamCurve, ResidualReport, SampledCurve, Trajectory,
                       ambient_normal_test, arc_length_reparametrize,
                       geodesic_bvp, geodesic_ivp, geodesic_residual)
from .immersion import AnalyticImmersion, Box, ImmersionMap
from .manifolds import (EquilibriumManifoldM2, RuledHypersurface, alpha_line,
                        assemble_phi, boxed_quantities,
                        closed_form_christoffel_M2, coordinate_curves,
                        manifold_from_economy, normal_vector_L2,
                        remark1_manifold, remark2_hypersurface,
                        ruled_decomposition_check)
from .serialize import dump_json, load_economy, load_manifold

__version__ = "0.1.0"

__all__ = [
    "AnalyticImmersion", "ArcLengthCurve", "Box", "ChristoffelSymbols",
    "ConstantPriceCurve", "CorollaryDashboard", "CurvatureReport",
    "CurveExpression", "CurveJet", "Economy", "EconomyPriceCurve",
    "EquilibriumManifoldM2", "EquilibriumSet", "ExprCurve", "ExprPriceCurve",
    "FgpReport", "GEODESIC_TOL", "ImmersionMap", "LineCurve", "Manifold",
    "MetricTensor", "ParamCurve", "Preference", "PriceIncomeCurve",
    "ResidualReport", "RuledHypersurface", "SampledCurve", "Trajectory",
    "alpha_line", "ambient_normal_test", "arc_length_reparametrize",
    "assemble_phi", "backend_name", "boxed_quantities", "check_fgp",
    "christoffel_from_metric", "closed_form_christoffel_M2",
    "coordinate_curves", "corollary_dashboard", "count_equilibria",
    "demand", "dump_json", "excess_demand", "geodesic_bvp", "geodesic_ivp",
    "geodesic_residual", "induced_metric", "jacobian", "load_economy",
    "load_manifold", "manifold_from_economy", "metric_derivatives",
    "normal_vector_L2", "parse_curve_expr", "price_constancy",
    "remark1_manifold", "remark2_hypersurface", "riemann_tensor",
    "ruled_decomposition_check", "sample_B_curve", "sectional_curvature",
    "solve_fiber_price", "solve_price_income", "__version__",
]
