import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqgeo import expr
from eqgeo.errors import EvalDomainError


def test_basic_eval():
    # sin(0) = 0, so the sin form evaluates to 2.0; the cos form gives 2.5
    assert expr.parse_curve_expr("2 + 0.5*sin(t)")(0.0) == 2.0
    assert expr.parse_curve_expr("2 + 0.5*cos(t)")(0.0) == 2.5


def test_power_rule_derivative():
    ce = expr.parse_curve_expr("t^2 + 1")
    d = ce.derivative()
    assert d(3.0) == 6.0


def test_parse_error_carries_offset():
    with pytest.raises(expr.ExprError) as err:
        expr.parse("2 +* t")
    assert err.value.offset == 3
    assert "offset 3" in str(err.value)


def test_unknown_identifier_with_offset():
    with pytest.raises(expr.ExprError) as err:
        expr.parse("2 + foo")
    assert err.value.offset == 4


def test_function_requires_parenthesis():
    with pytest.raises(expr.ExprError):
        expr.parse("sin t")


def test_precedence():
    # ^ above unary minus above * / above + -
    assert expr.parse_curve_expr("-2^2")(0.0) == -4.0
    assert expr.parse_curve_expr("2^-2")(0.0) == 0.25
    assert expr.parse_curve_expr("2 + 3*4")(0.0) == 14.0
    assert expr.parse_curve_expr("-t^2")(3.0) == -9.0
    assert expr.parse_curve_expr("2^3^2")(0.0) == 512.0  # right-assoc
    assert expr.parse_curve_expr("8/4/2")(0.0) == 1.0    # left-assoc


CASES = [
    "2 + 0.5*sin(t)",
    "-t^2 + 4*t - 1",
    "(t+1)*(t-1)/(t^2+1)",
    "sqrt(t + 2)*exp(-t/3)",
    "log(t + 2)^2",
    "t^-2.5",
    "2 - -3 * t",
    "cos(sin(t))",
]


@pytest.mark.parametrize("source", CASES)
def test_print_parse_round_trip(source):
    tree = expr.parse(source)
    printed = expr.to_string(tree)
    assert expr.parse(printed) == tree
    # and printing is a fixed point after one round
    assert expr.to_string(expr.parse(printed)) == printed


# random tree generator for the round-trip property
_leaf = st.one_of(
    st.floats(min_value=-10, max_value=10, allow_nan=False).map(expr.num),
    st.just(expr.Var("t")))


def _node(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/"), children, children).map(
            lambda o: expr.Bin(o[0], o[1], o[2])),
        # the parser folds a negated literal into the literal, so build
        # negations through the smart constructor that does the same
        children.map(expr.neg),
        st.tuples(st.sampled_from(expr.FUNCTIONS), children).map(
            lambda o: expr.Call(o[0], o[1])),
        st.tuples(children,
                  st.floats(min_value=-4, max_value=4,
                            allow_nan=False).map(expr.num)).map(
            lambda o: expr.Bin("^", o[0], o[1])),
    )


@given(st.recursive(_leaf, _node, max_leaves=20))
@settings(max_examples=200, deadline=None)
def test_round_trip_random_trees(tree):
    assert expr.parse(expr.to_string(tree)) == tree


@pytest.mark.parametrize("source", CASES)
def test_derivatives_match_central_differences(source):
    """Symbolic first/second derivative vs O(h^2) differences at 100 points."""
    ce = expr.parse_curve_expr(source)
    rng = np.random.default_rng(3)
    h = 1e-5
    checked = 0
    for t in rng.uniform(0.2, 2.0, size=100):
        try:
            v, d1, d2 = ce.jet(t)
            vp = ce(t + h)
            vm = ce(t - h)
        except EvalDomainError:
            continue
        checked += 1
        fd1 = (vp - vm) / (2 * h)
        fd2 = (vp - 2 * v + vm) / (h * h)
        scale = max(1.0, abs(d1))
        assert abs(fd1 - d1) <= 1e-8 * scale
        assert abs(fd2 - d2) <= 2e-4 * max(1.0, abs(d2))
    assert checked >= 90


def test_dual_jets_match_symbolic_jets():
    ce = expr.parse_curve_expr(
        "sin(t)*exp(0.3*t) + t^3/(t^2+1) + sqrt(t+2) + 2^t")
    for t in (0.1, 0.9, 1.7):
        sym = np.array(ce.jet(t))
        dual = np.array(ce.jet_dual(t))
        assert np.allclose(sym, dual, rtol=1e-12, atol=1e-12)


def test_grid_matches_pointwise():
    ce = expr.parse_curve_expr("exp(-t) * cos(3*t) + t^2")
    ts = np.linspace(0.0, 2.0, 57)
    v, d1, d2 = ce.grid(ts)
    for k in (0, 13, 56):
        vv, dd1, dd2 = ce.jet(float(ts[k]))
        assert v[k] == pytest.approx(vv, rel=1e-14)
        assert d1[k] == pytest.approx(dd1, rel=1e-14)
        assert d2[k] == pytest.approx(dd2, rel=1e-14)


def test_domain_errors():
    with pytest.raises(EvalDomainError):
        expr.parse_curve_expr("log(t)")(-1.0)
    with pytest.raises(EvalDomainError):
        expr.parse_curve_expr("sqrt(t)")(-0.5)
    with pytest.raises(EvalDomainError):
        expr.parse_curve_expr("1/t")(0.0)
    with pytest.raises(EvalDomainError):
        expr.parse_curve_expr("t^0.5")(-1.0)
    # value exists but the derivative has a pole at 0
    assert expr.parse_curve_expr("sqrt(t)")(0.0) == 0.0
    with pytest.raises(EvalDomainError):
        expr.parse_curve_expr("sqrt(t)").jet_dual(0.0)


def test_scientific_notation_round_trip():
    tree = expr.num(6.123233995736766e-17)
    assert expr.parse(expr.to_string(tree)) == tree
