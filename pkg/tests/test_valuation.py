"""Flag valuations, value sets and asymptotic orders."""
import random
from fractions import Fraction

import pytest

from okbody.series_ops import complete_series, points_subseries
from okbody.spaces import GradedSubspace
from okbody.valuation import (
    CoordinateHyperplane,
    CurvePoint,
    ToricPrime,
    ValuationError,
    asymptotic_ord,
    ord_along,
    valuate,
    valuation_echelon,
    value_set,
)
from okbody.variety_model import Flag, hirzebruch, projective_space, sections

P2 = projective_space(2)
FLAGS = [Flag.torus(P2, [0, 1]), Flag.torus(P2, [1, 2]), Flag.generic(P2, 11)]


def random_subspace(rng, m, flag):
    full = sections(P2.O(1), m, flag.chart, flag)
    k = rng.randint(1, full.dim)
    polys = [full.random_element(rng, height=20) for _ in range(k)]
    return GradedSubspace(m, 2, polys)


@pytest.mark.parametrize("flag", FLAGS, ids=lambda f: f.label())
def test_value_set_size_is_dimension(flag):
    rng = random.Random(5)
    for _ in range(15):
        W = random_subspace(rng, rng.randint(1, 4), flag)
        assert len(value_set(flag, W)) == W.dim


@pytest.mark.parametrize("flag", FLAGS, ids=lambda f: f.label())
def test_echelon_oracle_agrees(flag):
    rng = random.Random(9)
    for _ in range(10):
        W = random_subspace(rng, 3, flag)
        assert value_set(flag, W) == valuation_echelon(flag, W.basis)


@pytest.mark.parametrize("flag", FLAGS, ids=lambda f: f.label())
def test_valuation_is_additive(flag):
    rng = random.Random(2)
    full = sections(P2.O(1), 2, flag.chart, flag)
    for _ in range(20):
        s, t = full.random_element(rng), full.random_element(rng)
        if s.is_zero() or t.is_zero():
            continue
        a, b = valuate(flag, s), valuate(flag, t)
        assert valuate(flag, s * t) == tuple(i + j for i, j in zip(a, b))


def test_zero_section_has_no_valuation():
    from okbody.poly import MultiPoly

    with pytest.raises(ValuationError):
        valuate(FLAGS[0], MultiPoly.zero(2))


def test_complete_value_set_is_simplex_points():
    flag = FLAGS[0]
    W = sections(P2.O(1), 3, flag.chart, flag)
    vals = value_set(flag, W)
    assert vals == sorted((i, j) for i in range(4) for j in range(4) if i + j <= 3)


def test_orders_along_primes():
    X = hirzebruch(2)
    D = X.prime(1) + X.prime(0)  # C0 + f: C0 is fixed with ord 1/2
    C = complete_series(D)
    ao = asymptotic_ord(ToricPrime(1), C, 8)
    assert ao.exact and ao.value == Fraction(1, 2)
    assert all(v >= Fraction(1, 2) for _, v in ao.sequence)
    assert asymptotic_ord(ToricPrime(0), C, 6).value == 0


def test_order_at_curve_point_and_hyperplane():
    P1 = projective_space(1)
    W = points_subseries(P1.O(3), [((0,), 1)])
    for m in range(1, 5):
        Wm = W.level(m)
        assert ord_along(CurvePoint(0), Wm) == m
        assert ord_along(CoordinateHyperplane(0), Wm) == m
        assert ord_along(CurvePoint("inf"), Wm) == 0
