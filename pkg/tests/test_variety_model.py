"""Fans, divisor classes, intersection numbers and flags."""
import itertools
import math
from fractions import Fraction

import pytest

from okbody.exact_geometry import lattice_points, mixed_volume
from okbody.poly import MultiPoly
from okbody.variety_model import (
    DivisorClass,
    Flag,
    ModelError,
    hirzebruch,
    intersection_number,
    invariant_flags,
    p1xp1,
    projective_space,
    section_dimension,
    sections,
    toric,
)


def test_projective_space_numbers():
    for d in (1, 2, 3):
        P = projective_space(d)
        assert intersection_number(*[P.O(1)] * d) == 1
        assert intersection_number(*[P.O(2)] * d) == 2 ** d
        for m in range(4):
            assert section_dimension(P.O(1), m) == math.comb(m + d, d)


@pytest.mark.parametrize("e", [0, 1, 2, 3])
def test_hirzebruch_intersections(e):
    X = hirzebruch(e)
    C0, f = X.prime(1), X.prime(0)
    assert intersection_number(C0, C0) == -e
    assert intersection_number(f, f) == 0
    assert intersection_number(C0, f) == 1
    # D3 ~ C0 + e f
    assert X.prime(3).linearly_equivalent(C0 + f * e)


def test_hirzebruch_sections_closed_form():
    # h0(F_e, a C0 + b f) = sum_{i=0}^{a} max(0, b - i e + 1)
    for e in (1, 2):
        X = hirzebruch(e)
        for a, b in [(1, 1), (1, 2), (2, 3), (1, 4)]:
            D = X.prime(1) * a + X.prime(0) * b
            expect = sum(max(0, b - i * e + 1) for i in range(a + 1))
            assert section_dimension(D, 1) == expect


def test_p1xp1_sections_and_square():
    X = p1xp1()
    for a, b in [(1, 1), (1, 2), (2, 3)]:
        D = X.O(a, b)
        assert section_dimension(D, 1) == (a + 1) * (b + 1)
        assert intersection_number(D, D) == 2 * a * b


@pytest.mark.parametrize("X", [projective_space(2), p1xp1(), hirzebruch(1), hirzebruch(2)], ids=str)
def test_intersection_matches_mixed_volume_on_nef(X):
    # fan recursion against the polytope oracle on nef classes
    nef = []
    for coeffs in itertools.product(range(3), repeat=X.nrays):
        D = DivisorClass(X, coeffs)
        if D.is_nef() and D.is_big():
            nef.append(D)
    assert nef
    for A, B in itertools.combinations(nef[:6], 2):
        assert intersection_number(A, B) == mixed_volume([A.polytope(), B.polytope()])


def test_mixed_volume_oracle_p3():
    X = projective_space(3)
    A, B, C = X.O(1), X.O(2), X.O(3)
    assert intersection_number(A, B, C) == 6 == mixed_volume([A.polytope(), B.polytope(), C.polytope()])


def test_positivity():
    X = p1xp1()
    assert X.O(1, 1).is_ample()
    assert X.O(1, 0).is_nef() and not X.O(1, 0).is_big()
    F = hirzebruch(2)
    C0, f = F.prime(1), F.prime(0)
    assert (C0 + f * 2).is_nef() and not (C0 + f * 2).is_ample()
    assert (C0 + f * 3).is_ample()
    assert (C0 + f).is_big() and not (C0 + f).is_nef()


def test_translation_is_linear_equivalence():
    X = hirzebruch(1)
    D = X.prime(1) + X.prime(0) * 2
    for u in [(1, 0), (0, -1), (2, 3)]:
        assert D.translate(u).linearly_equivalent(D)
    assert not D.linearly_equivalent(D + X.prime(0))


def test_section_count_matches_polytope_lattice_points():
    X = hirzebruch(2)
    D = X.prime(1) + X.prime(0) * 3
    for m in range(1, 5):
        assert sections(D, m).dim == len(lattice_points(D.polytope().scaled(m)))


def test_fan_validation():
    with pytest.raises(ModelError):
        toric([(2, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ModelError):
        # singular cone spanned by (1,0), (1,2)
        toric([(1, 0), (1, 2), (-1, -1)], [(0, 1), (1, 2), (0, 2)])


def test_generic_flag_is_seeded_and_admissible():
    X = projective_space(2)
    f1, f2 = Flag.generic(X, 7), Flag.generic(X, 7)
    assert f1.matrix == f2.matrix and f1.point == f2.point
    assert f1.admissibility_problems() == []
    assert Flag.generic(X, 8).matrix != f1.matrix
    p = MultiPoly({(2, 0): 1, (0, 1): 3, (0, 0): -1}, 2)
    assert f1.to_chart_coords(f1.to_flag_coords(p)) == p


def test_flag_pairings():
    X = p1xp1()
    fl = Flag.torus(X, [0, 1])
    D = X.O(1, 2)
    assert fl.stratum_intersection(1, D) == 2
    assert fl.stratum_intersection(0, D) == 4
    P2 = projective_space(2)
    g = Flag.generic(P2, 3)
    assert g.curve_pairing(P2.O(5)) == 5
    assert g.stratum_intersection(0, P2.O(2)) == 4


def test_invariant_flag_count():
    assert len(invariant_flags(p1xp1())) == 8
    assert len(invariant_flags(projective_space(3))) == 4 * 6


def test_generic_curve_meets_each_boundary_divisor():
    P2 = projective_space(2)
    g = Flag.generic(P2, 5)
    meets = g.curve_meets()
    for j in range(3):
        assert sum(mult for _, mult in meets[j]) == 1


def test_rational_divisor_integrality():
    X = projective_space(2)
    D = X.O(Fraction(3, 2))
    assert D.denominator() == 2
    assert not D.integral_at(1) and D.integral_at(2)
    assert sections(D, 1).is_zero()
    assert sections(D, 2).dim == 10  # h0(O(3))
