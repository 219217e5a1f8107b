"""Graded semigroups, bodies, slices and volumes."""
import math
from fractions import Fraction

import pytest

from okbody.exact_geometry import convex_hull, slice_polytope, volume
from okbody.okounkov import (
    BodyError,
    GradedSemigroup,
    body_slice_compare,
    eventual_leading_coefficient,
    graded_semigroup,
    okounkov_body,
    slice_semigroup,
    toric_okounkov_body,
    volume_of_series,
)
from okbody.series_ops import complete_series
from okbody.variety_model import Flag, hirzebruch, invariant_flags, p1xp1, projective_space


def body_of(D, flag, M):
    return okounkov_body(graded_semigroup(flag, complete_series(D, flag), M))


def test_p2_body_is_simplex_for_every_flag():
    P2 = projective_space(2)
    simplex = convex_hull([(0, 0), (1, 0), (0, 1)])
    for flag in invariant_flags(P2) + [Flag.generic(P2, 4)]:
        b = body_of(P2.O(1), flag, 4)
        assert b.exact
        assert b.body.vertices == simplex.vertices


@pytest.mark.parametrize("flag", invariant_flags(hirzebruch(1)), ids=lambda f: f.label())
def test_semigroup_body_matches_polytope_oracle(flag):
    X = flag.model
    D = X.prime(1) + X.prime(0) * 2
    b = body_of(D, flag, 6)
    assert b.exact
    assert b.body.vertices == toric_okounkov_body(D, flag).vertices


def test_semigroup_is_closed_under_addition():
    X = hirzebruch(2)
    D = X.prime(1) + X.prime(0)
    flag = Flag.torus(X, [0, 3])
    g = graded_semigroup(flag, complete_series(D, flag), 6)
    assert g.closure_failures() == []


def test_slice_semigroup_levels():
    P2 = projective_space(2)
    flag = Flag.torus(P2, [0, 1])
    g = graded_semigroup(flag, complete_series(P2.O(2), flag), 6)
    s = slice_semigroup(g, [Fraction(1, 2)])
    for m in range(1, 7):
        if m % 2:
            assert s.level(m) == []
        else:
            # nu_1 = m/2, remaining entry ranges over 0..2m - m/2
            assert s.level(m) == [(j,) for j in range(2 * m - m // 2 + 1)]


def test_body_slice_comparison_has_interior_witness():
    X = p1xp1()
    flag = Flag.torus(X, [0, 1])
    D = X.O(1, 2)
    cmp_ = body_slice_compare(complete_series(D, flag), flag, [Fraction(1, 2)], 8)
    assert cmp_.contained and cmp_.equal
    assert cmp_.interior_witness is not None
    assert sorted(v[0] for v in cmp_.body_slice.vertices) == [0, 2]


def test_volume_agrees_with_body():
    X = p1xp1()
    flag = Flag.torus(X, [0, 1])
    rep = volume_of_series(complete_series(X.O(2, 3), flag), 8, flag)
    assert rep.body_volume == 12
    assert rep.extrapolated.value == 12 and rep.extrapolated.stabilized
    assert rep.agreement == "equal"


def test_rational_divisor_volume_uses_period():
    P2 = projective_space(2)
    flag = Flag.torus(P2, [0, 1])
    D = P2.O(Fraction(1, 2))
    rep = volume_of_series(complete_series(D, flag), 12, flag)
    assert rep.extrapolated.value == Fraction(1, 4)
    assert rep.body_volume == Fraction(1, 4)


def test_leading_coefficient_of_quasi_polynomial():
    vals = {m: (m * m + (m % 2)) for m in range(1, 13)}
    lead = eventual_leading_coefficient(vals, 2, period=2)
    assert lead.value == 1 and lead.stabilized


def test_empty_semigroup_raises():
    g = GradedSemigroup(2, 3, {1: [], 2: [], 3: []})
    with pytest.raises(BodyError):
        okounkov_body(g)


def test_body_volume_of_p3():
    P3 = projective_space(3)
    flag = Flag.torus(P3, [0, 1, 2])
    b = body_of(P3.O(1), flag, 4)
    assert math.factorial(3) * volume(b.body) == 1
    assert volume(slice_polytope(b.body, (0, 0))) == 1
