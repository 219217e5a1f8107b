"""Sparse rational polynomials: arithmetic, substitution, gcd and resultants."""
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from okbody.poly import MultiPoly

x = MultiPoly.variable(0, 2)
y = MultiPoly.variable(1, 2)
one = MultiPoly.constant(1, 2)

small_poly = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)),
    st.integers(-5, 5).map(Fraction),
    min_size=1,
    max_size=5,
).map(lambda d: MultiPoly(d, 2))


def test_lex_min_and_orders():
    p = x * y * y + x ** 2 + y ** 3 * x
    assert p.lex_min_exponent() == (1, 2)
    assert p.min_degree(0) == 1
    assert p.min_degree(1) == 0
    assert p.divide_by_var_power(0, 1) == y * y + x + y ** 3


def test_restrict_first_drops_variable():
    p = x * y + y ** 2 + one.scale(3)
    r = p.restrict_first(1)
    assert r.nvars == 1
    assert r.terms == {(2,): 1, (0,): 3}


def test_compose_affine_and_shift():
    p = x * x + y
    moved = p.compose_affine([[1, 0], [0, 1]], [1, 2])
    assert moved.evaluate([0, 0]) == 3
    assert p.shift([1, 2]).evaluate([0, 0]) == p.evaluate([1, 2])


def test_homogenize():
    p = x * x + y + one
    h = p.homogenize(2)
    assert h.nvars == 3
    assert all(sum(e) == 2 for e in h.terms)


def test_gcd_and_division():
    f = (x + y) * (x - one)
    g = (x + y) * (y + one)
    assert f.gcd(g) == (x + y).monic()
    assert f.exact_divide(x + y) == x - one


def test_resultant_of_lines_and_conic():
    # x - y and x + y - 2 meet at (1, 1): eliminating y leaves 2x - 2 up to a unit
    r = (x - y).resultant(x + y - one.scale(2), 1)
    roots = [t for t in range(-3, 4) if r.evaluate([t, 0]) == 0]
    assert roots == [1]
    # a circle and a line meet in two points: resultant degree 2
    circle = x * x + y * y - one
    line = y
    res = circle.resultant(line, 1)
    assert res.total_degree() == 2


@settings(max_examples=80, deadline=None)
@given(small_poly, small_poly)
def test_lex_min_is_additive(f, g):
    if f.is_zero() or g.is_zero():
        return
    a, b = f.lex_min_exponent(), g.lex_min_exponent()
    assert (f * g).lex_min_exponent() == tuple(i + j for i, j in zip(a, b))


@settings(max_examples=60, deadline=None)
@given(small_poly, small_poly, st.integers(-3, 3), st.integers(-3, 3))
def test_evaluation_is_a_ring_map(f, g, s, t):
    pt = [Fraction(s), Fraction(t)]
    assert (f * g).evaluate(pt) == f.evaluate(pt) * g.evaluate(pt)
    assert (f + g).evaluate(pt) == f.evaluate(pt) + g.evaluate(pt)


@settings(max_examples=40, deadline=None)
@given(small_poly)
def test_flint_roundtrip(f):
    assert MultiPoly.from_flint(f.to_flint(), 2) == f
