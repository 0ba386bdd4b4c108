import numpy as np
import pytest

from eqgeo import diffgeo as dg, geodesic as ge, manifolds as mf
from eqgeo.curves import (ConstantPriceCurve, ExprPriceCurve,
                          ReparametrizedPriceCurve)
from eqgeo.errors import CurvePositivityError, SingularPointError


# ------------------------------------------------------------ assemble_phi

def test_phi_evaluation_examples(l2_affine):
    np.testing.assert_allclose(l2_affine.immersion.eval([0.0, 3.0]),
                               [2.0, 3.0, -5.0], atol=1e-14)


def test_phi_constant_price_unit():
    curve = ConstantPriceCurve([1.0], "t", (0.0, 1.0))
    man = mf.assemble_phi(curve)
    np.testing.assert_allclose(man.immersion.eval([0.3, 0.0]),
                               [1.0, 0.0, 0.3], atol=1e-15)


def test_phi_three_goods():
    curve = ExprPriceCurve(["1", "1"], "t", (0.0, 1.0))
    man = mf.assemble_phi(curve)
    np.testing.assert_allclose(man.immersion.eval([0.9, 1.0, 1.0]),
                               [1.0, 1.0, 1.0, 1.0, 0.9 - 2.0], atol=1e-15)


def test_phi_rejects_positivity_violation():
    curve = ExprPriceCurve(["t"], "1", (-0.5, 1.0))
    with pytest.raises(CurvePositivityError) as err:
        mf.assemble_phi(curve)
    assert err.value.t <= 0.0


def test_phi_full_rank_on_domain(l2_fixture, rng):
    for x in l2_fixture.box.sample(rng, 100):
        jac = dg.jacobian(l2_fixture.immersion, x)
        assert np.linalg.matrix_rank(jac) == 2


def test_jet_immersion_derivatives_match_finite_differences(l4_fixture, rng):
    f = l4_fixture.immersion
    for x in f.box.sample(rng, 10):
        jac = f.jacobian(x)
        hes = f.second_derivs(x)
        eps = 1e-6
        for j in range(f.dim_param):
            xp, xm = x.copy(), x.copy()
            xp[j] += eps
            xm[j] -= eps
            np.testing.assert_allclose(
                jac[:, j], (f.eval(xp) - f.eval(xm)) / (2 * eps), atol=1e-7)
            np.testing.assert_allclose(
                hes[:, :, j],
                (f.jacobian(xp) - f.jacobian(xm)) / (2 * eps), atol=1e-7)


# -------------------------------------------------- closed-form Christoffel

def test_constant_price_linear_income_is_flat_connection():
    curve = ConstantPriceCurve([1.0], "t", (0.0, 1.0))
    man = mf.assemble_phi(curve)
    gamma = mf.closed_form_christoffel_M2(man, [0.5, 0.7]).gamma
    assert np.max(np.abs(gamma)) == 0.0


def test_spot_value_gamma_101(l2_fixture):
    gamma = mf.closed_form_christoffel_M2(l2_fixture, [0.0, 0.0]).gamma
    assert gamma[1, 0, 1] == pytest.approx(0.4, abs=1e-12)
    mask = np.ones_like(gamma, dtype=bool)
    mask[1, 0, 1] = mask[1, 1, 0] = False
    assert np.max(np.abs(gamma[mask])) <= 1e-12


@pytest.mark.parametrize("fixture_name",
                         ["l2_fixture", "identical_cd_manifold",
                          "l4_fixture"])
def test_closed_form_matches_numeric_oracle(fixture_name, request, rng):
    """100 random points per fixture: closed form vs finite differences."""
    man = request.getfixturevalue(fixture_name)
    worst = 0.0
    for x in man.box.sample(rng, 100):
        closed = mf.closed_form_christoffel_M2(man, x).gamma
        numeric = dg.christoffel_from_metric(man.immersion, x).gamma
        scale = max(1.0, float(np.max(np.abs(closed))))
        worst = max(worst, float(np.max(np.abs(closed - numeric))) / scale)
    assert worst <= 1e-6


def test_spatial_lower_index_block_vanishes(l4_fixture, rng):
    for x in l4_fixture.box.sample(rng, 50):
        closed = mf.closed_form_christoffel_M2(l4_fixture, x).gamma
        assert np.max(np.abs(closed[:, 1:, 1:])) == 0.0
        numeric = dg.christoffel_from_metric(l4_fixture.immersion, x).gamma
        assert np.max(np.abs(numeric[:, 1:, 1:])) <= 1e-7


def test_singular_point_detected():
    # p' == 0 and A == 0 along w' == 0: denominator vanishes everywhere
    curve = ConstantPriceCurve([2.0], "1", (0.0, 1.0))
    man = mf.assemble_phi(curve)
    with pytest.raises(SingularPointError):
        mf.closed_form_christoffel_M2(man, [0.5, 0.0])


def test_boxed_quantities_spot(l2_affine):
    q = l2_affine.boxed(0.0, [0.0])
    assert (q.A, q.A_prime, q.B, q.C) == (0.0, 0.0, 1.0, 0.0)
    assert q.price_norm_sq == pytest.approx(5.0)
    assert q.denom == pytest.approx(5.0)


def test_arc_length_identity_C_plus_AAprime(l2_fixture, l4_fixture):
    """Unit-speed t-curves satisfy C + A A' = 0 (derivative of the
    constant-speed identity B + A^2 = 1)."""
    for man in (l2_fixture, l4_fixture):
        tc = mf.coordinate_curves(man)[0]
        alc = ge.arc_length_reparametrize(man, tc)
        tau = alc.t_of_s
        dtau = lambda s: alc.jets(s)[1][0]
        ddtau = lambda s: alc.jets(s)[2][0]
        unit_curve = ReparametrizedPriceCurve(man.curve, tau, dtau, ddtau,
                                              (0.0, alc.length))
        for s in np.linspace(0.05, alc.length - 0.05, 9):
            q = mf.boxed_quantities(unit_curve, s, np.zeros(man.L - 1))
            assert q.B + q.A ** 2 == pytest.approx(1.0, abs=1e-10)
            assert q.C + q.A * q.A_prime == pytest.approx(0.0, abs=1e-8)


# ------------------------------------------------------------ normal vector

def test_normal_vector_spot_values(l2_affine):
    np.testing.assert_allclose(mf.normal_vector_L2(l2_affine, 0.0, 3.0),
                               [3.0, 2.0, 1.0], atol=1e-14)
    curve = ConstantPriceCurve([1.0], "t", (0.0, 1.0))
    man = mf.assemble_phi(curve)
    np.testing.assert_allclose(mf.normal_vector_L2(man, 0.5, 0.7),
                               [-1.0, 0.0, 0.0], atol=1e-14)


def test_normal_vector_orthogonal_to_tangents(l2_fixture, rng):
    for x in l2_fixture.box.sample(rng, 20):
        n = mf.normal_vector_L2(l2_fixture, x[0], x[1])
        jac = l2_fixture.immersion.jacobian(x)
        assert abs(float(n @ jac[:, 0])) <= 1e-10
        assert abs(float(n @ jac[:, 1])) <= 1e-10


def test_normal_vector_requires_l2(l4_fixture):
    with pytest.raises(ValueError):
        mf.normal_vector_L2(l4_fixture, 0.5, 0.0)


# -------------------------------------------------------- ruled structure

def test_equilibrium_manifolds_are_ruled(l2_fixture, l4_fixture,
                                         identical_cd_manifold):
    for man in (l2_fixture, l4_fixture, identical_cd_manifold):
        ok, defect = mf.ruled_decomposition_check(man)
        assert ok
        assert defect <= 1e-12


def test_sphere_is_not_ruled(sphere):
    ok, defect = mf.ruled_decomposition_check(sphere)
    assert not ok
    assert defect > 1e-3


def test_remark2_is_ruled(remark2):
    ok, defect = mf.ruled_decomposition_check(remark2)
    assert ok


# ------------------------------------------------------- coordinate curves

def test_coordinate_curves_l2(l2_fixture):
    curves = mf.coordinate_curves(l2_fixture)
    assert len(curves) == 2
    np.testing.assert_array_equal(curves[0].point, [0.0, 0.0])
    np.testing.assert_array_equal(curves[1].point, [0.0, 1.0])
    np.testing.assert_array_equal(curves[0].eval(0.0), [0.0, 0.0])
    np.testing.assert_array_equal(curves[0].direction, [1.0, 0.0])


def test_coordinate_curves_l4(l4_fixture):
    curves = mf.coordinate_curves(l4_fixture)
    assert len(curves) == 4
    bases = np.array([c.point for c in curves])
    np.testing.assert_array_equal(bases[:, 0], 0.0)
    np.testing.assert_array_equal(bases[1:, 1:], np.eye(3))


def test_alpha_lines_always_geodesic(l2_fixture, l4_fixture, rng):
    for man in (l2_fixture, l4_fixture):
        for j in range(1, man.L):
            t0 = float(rng.uniform(man.box.lo[0] + 0.05,
                                   man.box.hi[0] - 0.05))
            line = mf.alpha_line(man, t0, j)
            rep = ge.geodesic_residual(man, line, np.linspace(-1.5, 1.5, 21))
            assert rep.max_normal <= 1e-8
            assert rep.max_total <= 1e-8


# ----------------------------------------------------------- counterexample

def test_remark1_coordinate_curves_geodesic(remark1):
    for curve in mf.coordinate_curves(remark1):
        rep = ge.geodesic_residual(remark1, curve,
                                   np.linspace(-1.0, 1.0, 41))
        assert rep.max_total <= 1e-8


def test_remark1_price_slope_is_one(remark1):
    grid = np.linspace(-1.0, 1.0, 41)
    assert remark1.curve.max_price_derivative(grid) == pytest.approx(1.0)


def test_remark1_positivity_violated_at_nonpositive_t(remark1):
    hit = remark1.curve.positivity_violation()
    assert hit is not None
    t, j, pj = hit
    assert t <= 0.0
    assert j == remark1.L - 2  # the price component that equals t
    assert pj <= 0.0


def test_remark1_requires_positive_constants():
    with pytest.raises(ValueError):
        mf.remark1_manifold(4, [0.8, -1.0])
    with pytest.raises(ValueError):
        mf.remark1_manifold(4, [0.8])  # wrong count


def test_remark2_curvature_flat_everywhere(remark2, rng):
    worst = 0.0
    for x in remark2.box.sample(rng, 50):
        u, v = rng.normal(size=3), rng.normal(size=3)
        worst = max(worst, abs(remark2.sectional(x, u, v).sectional))
    assert worst <= 1e-5


def test_remark2_t_curves_orthogonal_acceleration(remark2):
    for curve in mf.coordinate_curves(remark2):
        alc = ge.arc_length_reparametrize(remark2, curve)
        dev = ge.ambient_normal_test(remark2.immersion, alc,
                                     np.linspace(0, alc.length, 17))
        assert dev <= 1e-8


def test_remark2_not_a_hyperplane(remark2):
    assert remark2.hyperplane_spread() > 0.1


def test_remark2_tangent_basis(remark2):
    jac = remark2.immersion.jacobian([0.4, 0.1, -0.3])
    # spatial directions are the first canonical vectors of the ambient
    np.testing.assert_allclose(jac[:, 1], [1, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(jac[:, 2], [0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(jac[:, 0],
                               [0, 0, -np.sin(0.4), np.cos(0.4)], atol=1e-12)


def test_remark2_rejects_degenerate_profile():
    with pytest.raises(ValueError):
        mf.remark2_hypersurface(3, "t^2", "t^3", tspan=(-0.5, 0.5))


# ------------------------------------------ frozen mathematical regressions

def test_cobb_douglas_coordinate_curves_are_pregeodesics(hetero_cd_manifold):
    """For two-good Cobb-Douglas economies A C = A' B identically, so every
    t-coordinate curve is a pregeodesic: the residual is purely tangential.
    This is why the finite-geodesic-property verdict must score the full
    chart-parametrized residual rather than the normal component."""
    man = hetero_cd_manifold
    grid = np.linspace(0.15, 0.85, 15)
    for base_alpha in (0.0, 1.0):
        for t in grid:
            q = man.boxed(float(t), [base_alpha])
            assert abs(q.A * q.C - q.A_prime * q.B) <= 1e-7
    curve = mf.coordinate_curves(man)[0]
    rep = ge.geodesic_residual(man, curve, grid)
    assert rep.max_normal <= 1e-6       # tangential only
    assert rep.max_scaled_total >= 1e-2  # but decidedly not a geodesic


def test_affine_price_window_is_exactly_geodesic(l2_affine):
    """p(t) = t + 2 with constant income: every coordinate curve is an
    ambient straight line, hence an exact geodesic, even though the price
    moves. Positivity on the whole line would be violated (p(-2) = 0); on a
    finite window this is the sign-crossing counterexample in disguise, so
    a nonzero residual for this fixture would be wrong."""
    for curve in mf.coordinate_curves(l2_affine):
        rep = ge.geodesic_residual(l2_affine, curve,
                                   np.linspace(-0.5, 1.0, 31))
        assert rep.max_total == 0.0
        alc = ge.arc_length_reparametrize(l2_affine, curve)
        dev = ge.ambient_normal_test(l2_affine.immersion, alc,
                                     np.linspace(0, alc.length, 11))
        assert dev <= 1e-12
