"""Graded series: V(D;a), sandwich bounds, base loci, restricted volumes, moving intersections."""
from fractions import Fraction

import pytest

from okbody.exact_geometry import lattice_points
from okbody.series_ops import (
    HypothesisError,
    SeriesError,
    augmented_base_locus,
    base_locus,
    build_V,
    check_conditions,
    complete_series,
    lemma_base_locus_check,
    moving_self_intersection,
    points_subseries,
    restrict_series,
    restricted_vol_formula,
    restricted_volume,
    sandwich_check,
    toric_stable_base_locus,
    verify_components,
)
from okbody.variety_model import Flag, hirzebruch, p1xp1, projective_space

P2 = projective_space(2)
F2 = hirzebruch(2)
C0, FIB = F2.prime(1), F2.prime(0)


@pytest.mark.parametrize("flag", [Flag.torus(P2, [0, 1]), Flag.generic(P2, 3)], ids=lambda f: f.label())
def test_V_dimensions_on_p2(flag):
    V = build_V(P2.O(2), [Fraction(1, 2)], flag)
    # V_m(O(2);1/2) = sections of O(3m/2) on a line, m even
    assert {m: V.level(m).dim for m in range(1, 7)} == {1: 0, 2: 4, 3: 0, 4: 7, 5: 0, 6: 10}


def test_V_at_zero_is_complete_restriction_for_ample():
    flag = Flag.torus(P2, [0, 1])
    V = build_V(P2.O(1), [0], flag)
    R = restrict_series(complete_series(P2.O(1), flag), 1, flag)
    for m in range(1, 5):
        assert V.level(m).same_space(R.level(m))


def test_V_outside_big_range_is_refused():
    flag = Flag.torus(P2, [0, 1])
    with pytest.raises(SeriesError):
        build_V(P2.O(1), [1], flag)


def test_V_is_multiplicative():
    flag = Flag.torus(F2, [0, 3])
    V = build_V(C0 + FIB * 3, [Fraction(1, 3)], flag)
    assert V.multiplicativity_failures([(3, 3), (3, 6)]) == []


@pytest.mark.parametrize(
    "D,a,flag",
    [
        (P2.O(2), [Fraction(1, 2)], Flag.torus(P2, [0, 1])),
        (P2.O(2), [Fraction(1, 2)], Flag.generic(P2, 3)),
        (C0 + FIB * 3, [Fraction(1, 3)], Flag.torus(F2, [0, 3])),
        (C0 + FIB * 2, [Fraction(1, 2)], Flag.torus(F2, [3, 0])),
    ],
    ids=["p2-torus", "p2-generic", "f2-fibre", "f2-section"],
)
def test_sandwich(D, a, flag):
    V = build_V(D, a, flag)
    for m in range(1, 9):
        res = sandwich_check(V, m)
        assert res["lower"] and res["upper"] in (True, None)
        if len(a) == 1:
            assert res.get("r1_equality", True)


def test_stable_base_locus_hirzebruch():
    B = toric_stable_base_locus(C0 + FIB)
    assert B.divisorial_labels() == ["D1"]
    assert B.multiplicity("D1") == Fraction(1, 2)
    assert toric_stable_base_locus(C0 + FIB * 2).is_empty()


def test_base_locus_per_level_and_components():
    C = complete_series(C0 + FIB)
    for m in (1, 2, 3):
        desc = base_locus(C, m)
        assert "D1" in desc.labels()
        assert verify_components(desc, C.level(m))


def test_points_series_base_locus():
    P1 = projective_space(1)
    W = points_subseries(P1.O(3), [((0,), 1)])
    desc = base_locus(W, 2)
    assert desc.labels()
    assert verify_components(desc, W.level(2))


def test_augmented_base_locus():
    plus = augmented_base_locus(C0 + FIB * 2)
    assert plus.stabilized
    assert plus.locus.divisorial_labels() == ["D1"]
    assert augmented_base_locus(p1xp1().O(1, 1)).locus.is_empty()


def face_rank_oracle(D, j, m):
    """Restricted rank to the invariant curve D_j: lattice points on the face <u,v_j> + m a_j = 0."""
    P = D.polytope().scaled(m)
    v = D.model.rays[j]
    return sum(1 for u in lattice_points(P) if sum(x * y for x, y in zip(u, v)) + m * D.coeffs[j] == 0)


@pytest.mark.parametrize(
    "D,order,expect",
    [(C0 + FIB * 2, [0, 1], 1), (C0 + FIB, [0, 3], Fraction(1, 2)), (C0 + FIB * 3, [1, 2], 1)],
    ids=["nef", "fixed-part", "section"],
)
def test_restricted_volume_three_ways(D, order, expect):
    flag = Flag.torus(F2, order)
    rep = restricted_volume(D, flag, 12)
    for m in range(1, 13):
        assert rep.ranks[m] == face_rank_oracle(D, order[0], m)
    assert rep.stabilized and rep.estimate == expect
    assert rep.formula.hypotheses_ok and rep.formula.value == expect


def test_formula_rejects_flag_point_in_base_locus():
    flag = Flag.torus(F2, [0, 1])
    with pytest.raises(HypothesisError):
        restricted_vol_formula(C0 + FIB, flag)


def test_restricted_volume_refuses_curve_in_augmented_locus():
    flag = Flag.torus(F2, [1, 0])
    with pytest.raises(HypothesisError):
        restricted_volume(C0 + FIB * 2, flag, 4)


def test_lemma_base_locus_bound():
    flag = Flag.torus(F2, [0, 3])
    res = lemma_base_locus_check(C0 + FIB * 2, [Fraction(1, 4)], flag, 8)
    assert res["ok"]


def test_moving_intersection_curve():
    P1 = projective_space(1)
    W = points_subseries(P1.O(3), [((0,), 1)])
    for m in range(1, 7):
        assert moving_self_intersection(W.level(m), 1) == 2 * m


def test_moving_intersection_plane():
    C = complete_series(P2.O(1))
    for m in (1, 2, 3):
        assert moving_self_intersection(C.level(m), 2) == m * m


def test_moving_intersection_with_base_points():
    W = points_subseries(P2.O(2), [((0, 0), 1), ((1, 0), 1), ((0, 1), 1)])
    assert moving_self_intersection(W.level(2), 2) == 4
    desc = base_locus(W, 1)
    assert len(desc.points) == 3


def test_moving_intersection_domain():
    C = complete_series(projective_space(3).O(1))
    with pytest.raises(SeriesError):
        moving_self_intersection(C.level(1), 3)


def test_conditions_report():
    flag = Flag.torus(P2, [0, 1])
    rep = check_conditions(complete_series(P2.O(1), flag), 5, flag)
    assert rep["bounded_values"]["pass"] is True
    assert "heuristic" in str(rep["growth_and_separation"]).lower() or "consistent" in str(rep["growth_and_separation"]).lower()
