import numpy as np
import pytest

from eqgeo import fgp, serialize
from eqgeo.curves import ExprPriceCurve


# ------------------------------------------------------------ price scores

def test_price_constancy_examples(l2_fixture, hetero_cd_manifold):
    grid = np.linspace(0.0, 1.0, 101)
    const = ExprPriceCurve(["2.5"], "t", (0.0, 1.0))
    assert fgp.price_constancy(const, grid) <= 1e-10
    ramp = ExprPriceCurve(["t + 2"], "1", (0.0, 1.0))
    assert fgp.price_constancy(ramp, grid) == pytest.approx(1.0, abs=1e-12)
    egrid = np.linspace(0.15, 0.85, 101)
    assert fgp.price_constancy(hetero_cd_manifold.curve, egrid) > 1e-2


# ---------------------------------------------------------------- check_fgp

def test_identical_cd_fgp_holds(identical_cd_manifold):
    rep = fgp.check_fgp(identical_cd_manifold)
    assert rep.verdict == fgp.FGP_HOLDS
    assert rep.max_residual <= 1e-8
    assert rep.price_variation <= 1e-8
    assert rep.positivity_ok
    assert not rep.theorem_violation
    assert len(rep.per_curve) == 2


def test_hetero_cd_fgp_fails(hetero_cd_manifold):
    rep = fgp.check_fgp(hetero_cd_manifold)
    assert rep.verdict == fgp.FGP_FAILS
    assert any(c["residual"] > 1e-3 for c in rep.per_curve)
    assert not rep.theorem_violation


def test_remark1_raises_violation_flag(remark1):
    rep = fgp.check_fgp(remark1)
    assert rep.verdict == fgp.FGP_HOLDS
    assert rep.max_residual <= 1e-8
    assert rep.price_variation == pytest.approx(1.0, abs=1e-10)
    assert rep.positivity_ok is False
    assert rep.theorem_violation
    assert any("positivity" in note for note in rep.notes)


def test_remark2_has_no_price_fields(remark2):
    rep = fgp.check_fgp(remark2)
    assert rep.verdict == fgp.FGP_HOLDS
    assert rep.price_variation is None
    assert rep.positivity_ok is None
    assert not rep.theorem_violation


def test_affine_window_flag_names_the_cause(l2_affine):
    rep = fgp.check_fgp(l2_affine)
    assert rep.verdict == fgp.FGP_HOLDS
    assert rep.theorem_violation
    assert rep.positivity_ok  # positive on the window, the note explains
    assert any("affine" in note for note in rep.notes)


def test_tolerances_are_overridable(hetero_cd_manifold):
    rep = fgp.check_fgp(hetero_cd_manifold, geodesic_tol=1e6)
    assert rep.verdict == fgp.FGP_HOLDS  # absurd tolerance flips the verdict


# ----------------------------------------------- randomized theorem sweeps

def test_theorem_direction_on_randomized_manifolds(
        identical_cd_manifold, hetero_cd_manifold):
    """Geodesic coordinate curves force constant prices; clearly varying
    prices force a clearly non-geodesic coordinate curve. Zero exceptions
    over 20 randomized positive-price manifolds plus both economies."""
    from conftest import randomized_manifold_family
    manifolds = [identical_cd_manifold, hetero_cd_manifold]
    manifolds += randomized_manifold_family(seed=1234, count=20)
    for man in manifolds:
        rep = fgp.check_fgp(man)
        residuals = [c["residual"] for c in rep.per_curve]
        if max(residuals) <= 1e-8:
            assert rep.price_variation <= 1e-6, (man.name, rep.per_curve)
        if rep.price_variation >= 1e-2:
            assert max(residuals) >= 1e-3, (man.name, rep.per_curve)
        # the flag must never fire on these positive-price fixtures
        assert not rep.theorem_violation, man.name


def test_flatness_direction_constant_price_manifolds(
        identical_cd_manifold, constant_price_manifold, rng):
    """Constant price implies zero sectional curvature at every sample."""
    for man in (identical_cd_manifold, constant_price_manifold):
        rep = fgp.check_fgp(man)
        assert rep.price_variation <= 1e-8
        worst = 0.0
        for x in man.box.sample(rng, 25, margin_frac=0.1):
            u, v = rng.normal(size=man.dim), rng.normal(size=man.dim)
            worst = max(worst, abs(man.sectional(x, u, v).sectional))
        assert worst <= 1e-6


# ----------------------------------------------------------------- dashboard

def test_dashboard_identical_cd(identical_cd_manifold):
    dash = fgp.corollary_dashboard(identical_cd_manifold, seed=7)
    assert dash.price_constancy <= 1e-8
    assert dash.curvature_max_abs <= 1e-6
    assert dash.fgp.verdict == fgp.FGP_HOLDS
    assert dash.equilibrium_counts == [1] * 5
    assert dash.entropy == "UNAVAILABLE"
    assert dash.consistent


def test_dashboard_hetero_cd(hetero_cd_manifold):
    dash = fgp.corollary_dashboard(hetero_cd_manifold, seed=7)
    assert dash.price_constancy > 1e-2
    assert dash.fgp.verdict == fgp.FGP_FAILS
    assert dash.curvature_max_abs > 1e-6  # visibly curved somewhere
    assert dash.equilibrium_counts == [1] * 5
    assert dash.consistent  # nothing to enforce when prices move
    assert dash.observations  # measured values recorded as observations


def test_dashboard_constant_price_nonaffine_chart(constant_price_manifold):
    """A flat constant-price manifold whose income runs on a bent schedule:
    the coordinate-curve images are geodesics even though the chart
    parametrization fails the ODE, and that must not count against the
    constant-price implications."""
    dash = fgp.corollary_dashboard(constant_price_manifold, seed=7)
    assert dash.price_constancy <= 1e-8
    assert dash.curvature_max_abs <= 1e-6
    assert dash.consistent
    assert any("not affine in arc length" in o for o in dash.observations)


def test_dashboard_remark2(remark2):
    dash = fgp.corollary_dashboard(remark2, seed=7)
    assert dash.price_constancy is None
    assert dash.curvature_max_abs <= 1e-5
    assert dash.fgp.verdict == fgp.FGP_HOLDS
    assert dash.equilibrium_counts is None
    assert dash.consistent


def test_dashboard_deterministic_bytes(identical_cd_manifold):
    a = serialize.dump_json(
        fgp.corollary_dashboard(identical_cd_manifold, seed=3).to_dict())
    b = serialize.dump_json(
        fgp.corollary_dashboard(identical_cd_manifold, seed=3).to_dict())
    assert a.encode() == b.encode()
    c = serialize.dump_json(
        fgp.corollary_dashboard(identical_cd_manifold, seed=4).to_dict())
    assert a != c  # the seed is live, not decorative


def test_dashboard_seed_recorded(identical_cd_manifold):
    dash = fgp.corollary_dashboard(identical_cd_manifold, seed=11)
    assert dash.seed == 11
    assert dash.to_dict()["seed"] == 11
