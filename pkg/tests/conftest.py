import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eqgeo import diffgeo, economy as ec, immersion as im, manifolds as mf
from eqgeo.curves import ExprPriceCurve

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def flat():
    return diffgeo.Manifold(im.flat_plane())


@pytest.fixture(scope="session")
def polar():
    return diffgeo.Manifold(im.polar_chart())


@pytest.fixture(scope="session")
def sphere():
    return diffgeo.Manifold(im.sphere_chart())


@pytest.fixture(scope="session")
def identity_chart():
    box = im.Box((-8.0, -8.0), (8.0, 8.0))
    return diffgeo.Manifold(
        im.AnalyticImmersion(["u", "v"], ("u", "v"), box, name="identity"))


@pytest.fixture(scope="session")
def l2_fixture():
    """The canonical p(t)=t+2 manifold (income 1 + t^3)."""
    curve = ExprPriceCurve(["t + 2"], "1 + t^3", (-0.5, 1.0),
                           name="l2-fixture")
    return mf.assemble_phi(curve, name="analytic-l2")


@pytest.fixture(scope="session")
def l2_affine():
    """p(t)=t+2 with constant income: the affine-window edge case."""
    curve = ExprPriceCurve(["t + 2"], "1", (-0.5, 1.0), name="l2-affine")
    return mf.assemble_phi(curve, name="analytic-l2-affine")


@pytest.fixture(scope="session")
def l4_fixture():
    curve = ExprPriceCurve(
        ["2 + 0.5*sin(t)", "1.5 + 0.25*cos(t)", "1 + 0.2*sin(2*t)"],
        "1 + 0.3*t^2 + 0.1*sin(t)", (0.0, 1.0), name="l4-fixture")
    return mf.assemble_phi(curve, name="analytic-l4")


@pytest.fixture(scope="session")
def constant_price_manifold():
    curve = ExprPriceCurve(["1.5"], "t + t^3", (0.0, 1.0),
                           name="constant-price")
    return mf.assemble_phi(curve, name="constant-price")


@pytest.fixture(scope="session")
def identical_cd():
    return ec.Economy(
        2, (ec.Preference("cobb_douglas", [0.5, 0.5]),
            ec.Preference("cobb_douglas", [0.5, 0.5])), r=[1.0, 1.0])


@pytest.fixture(scope="session")
def hetero_cd():
    return ec.Economy(
        2, (ec.Preference("cobb_douglas", [0.3, 0.7]),
            ec.Preference("cobb_douglas", [0.6, 0.4])), r=[1.0, 1.0],
        omega1=[1.0, 0.0])


@pytest.fixture(scope="session")
def ces_mirror():
    a = 1024 / 1025
    eps = 1 / 13
    return ec.Economy(
        2, (ec.Preference("ces", [a, 1 - a], rho=-4.0),
            ec.Preference("ces", [1 - a, a], rho=-4.0)), r=[1.0, 1.0],
        omega1=[1 - eps, eps])


@pytest.fixture(scope="session")
def identical_cd_manifold(identical_cd):
    return mf.manifold_from_economy(identical_cd, name="identical-cd")


@pytest.fixture(scope="session")
def hetero_cd_manifold(hetero_cd):
    return mf.manifold_from_economy(hetero_cd, name="hetero-cd")


@pytest.fixture(scope="session")
def remark1():
    return mf.remark1_manifold(3, [0.8])


@pytest.fixture(scope="session")
def remark2():
    return mf.remark2_hypersurface(3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)


# randomized positive-price manifold family shared by the theorem sweeps

def random_positive_curve(rng_, L):
    """Strictly positive analytic price curves with genuinely curved
    income paths."""
    exprs = []
    for _ in range(L - 1):
        c = rng_.uniform(1.0, 3.0)
        a = rng_.uniform(0.2, 0.45) * c
        om = rng_.uniform(0.6, 2.2)
        ph = rng_.uniform(0.0, 6.28)
        exprs.append(f"{c!r} + {a!r}*sin({om!r}*t + {ph!r})")
    w = (f"{rng_.uniform(0.5, 2.0)!r} + {rng_.uniform(0.4, 1.2)!r}*t "
         f"+ {rng_.uniform(0.2, 0.6)!r}*sin(t + {rng_.uniform(0, 6.28)!r})")
    return ExprPriceCurve(exprs, w, (0.0, 1.0))


def random_constant_curve(rng_, L, linear_income):
    p = [repr(rng_.uniform(0.5, 3.0)) for _ in range(L - 1)]
    if linear_income:
        w = f"{rng_.uniform(0.5, 2.0)!r} + {rng_.uniform(0.5, 2.0)!r}*t"
    else:
        # strictly monotone income keeps the immersion non-degenerate
        w = f"1 + exp({rng_.uniform(0.3, 0.9)!r}*t)"
    return ExprPriceCurve(p, w, (0.0, 1.0))


def randomized_manifold_family(seed=1234, count=20):
    rng_ = np.random.default_rng(seed)
    out = []
    for i in range(count):
        L = int(rng_.choice([2, 3, 4]))
        if i % 5 == 4:
            curve = random_constant_curve(rng_, L,
                                          linear_income=(i % 2 == 0))
        else:
            curve = random_positive_curve(rng_, L)
        out.append(mf.assemble_phi(curve, name=f"random-{i}"))
    return out
