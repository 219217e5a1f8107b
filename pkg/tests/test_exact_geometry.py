"""Exact polytopes and linear algebra, checked against closed forms and slow oracles."""
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from okbody.exact_geometry import (
    Polytope,
    affine_volume,
    convex_hull,
    det,
    int_det,
    lattice_points,
    minkowski_sum,
    mixed_volume,
    nullspace,
    polytope_from_halfspaces,
    q,
    rank_and_reduce,
    rref_python,
    slice_polytope,
    solve,
    volume,
)


def simplex(d, scale=1):
    pts = [tuple(0 for _ in range(d))]
    pts += [tuple(scale if i == j else 0 for j in range(d)) for i in range(d)]
    return convex_hull(pts)


def box(*sides):
    import itertools

    return convex_hull(list(itertools.product(*[(0, s) for s in sides])))


def pick_area(P):
    """Pick's theorem: A = I + B/2 - 1 for lattice polygons."""
    pts = lattice_points(P)
    boundary = [p for p in pts if not P.in_interior(p)]
    return Fraction(len(pts) - len(boundary)) + Fraction(len(boundary), 2) - 1


def test_floats_refused():
    with pytest.raises(TypeError):
        q(0.5)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_simplex_volume(d):
    assert volume(simplex(d)) == Fraction(1, math.factorial(d))
    assert volume(simplex(d, 3)) == Fraction(3 ** d, math.factorial(d))


@pytest.mark.parametrize("d,m", [(2, 3), (3, 2), (3, 4)])
def test_simplex_lattice_points(d, m):
    assert len(lattice_points(simplex(d, m))) == math.comb(m + d, d)


def test_box_volume_and_slice():
    B = box(2, 3, 5)
    assert volume(B) == 30
    S = slice_polytope(B, (1,))
    assert volume(S) == 15
    S2 = slice_polytope(B, (1, Fraction(1, 2)))
    assert volume(S2) == 5
    assert slice_polytope(B, (3,)).is_empty


def test_degenerate_hull_has_affine_volume():
    seg = convex_hull([(0, 0), (2, 2), (1, 1)])
    assert seg.affine_dim == 1
    assert volume(seg) == 0
    assert affine_volume(seg) > 0
    assert sorted(seg.vertices) == [(0, 0), (2, 2)]
    assert seg.contains((Fraction(1, 2), Fraction(1, 2)))
    assert not seg.contains((1, 0))


def test_halfspace_roundtrip():
    P = polytope_from_halfspaces([((-1, 0), 0), ((0, -1), 0), ((1, 1), 2)], 2)
    assert sorted(P.vertices) == [(0, 0), (0, 2), (2, 0)]
    assert volume(P) == 2


def test_mixed_volume_oracles():
    cube = box(1, 1, 1)
    # MV(P,...,P) = d! vol(P)
    assert mixed_volume([cube, cube, cube]) == 6
    assert mixed_volume([box(2, 2, 2)] * 3) == 48
    # Bernstein count for two generic conics
    tri = simplex(2, 2)
    assert mixed_volume([tri, tri]) == 4
    # MV of two orthogonal segments is their area product
    s1, s2 = convex_hull([(0, 0), (1, 0)]), convex_hull([(0, 0), (0, 3)])
    assert mixed_volume([s1, s2]) == 3


def test_minkowski_sum_volume():
    tri = simplex(2)
    sq = box(1, 1)
    S = minkowski_sum(tri, sq)
    # vol(A+B) = vol A + MV(A,B) + vol B with MV(A,B) = 2 here
    assert volume(S) == Fraction(1, 2) + 2 + 1


polygon_pts = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=3, max_size=9)


@settings(max_examples=60, deadline=None)
@given(polygon_pts)
def test_hull_contains_inputs_and_pick(points):
    P = convex_hull(points)
    for p in points:
        assert P.contains(p)
    if P.affine_dim == 2:
        assert volume(P) == pick_area(P)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)), min_size=4, max_size=10))
def test_hull_3d_vertices_are_inputs(points):
    P = convex_hull(points)
    assert set(P.vertices) <= {tuple(Fraction(c) for c in p) for p in points}
    for p in points:
        assert P.contains(p)


matrices = st.lists(st.lists(st.integers(-5, 5), min_size=4, max_size=4), min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_flint_rank_matches_python_oracle(rows):
    red, pivots = rref_python(rows, 4)
    rank, basis = rank_and_reduce(rows, 4)
    assert rank == len(pivots) == len(basis)
    for v in nullspace(rows, 4):
        for r in rows:
            assert sum(Fraction(a) * b for a, b in zip(r, v)) == 0
    assert len(nullspace(rows, 4)) == 4 - rank


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3))
def test_bareiss_matches_rational_det(mat):
    assert int_det(mat) == det(mat)


def test_solve():
    assert solve([[2, 1], [1, 3]], [3, 5]) == (Fraction(4, 5), Fraction(7, 5))
    assert solve([[1, 1], [2, 2]], [1, 3]) is None


def test_polytope_json_roundtrip():
    P = simplex(3, 2)
    assert Polytope.from_json(P.to_json()).vertices == P.vertices
