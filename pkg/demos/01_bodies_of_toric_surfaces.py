"""Okounkov bodies of ample divisors on P2 and P1 x P1.

For a torus-invariant flag the body is the divisor polytope written in the
flag's exponent coordinates.  We rebuild it from the value semigroup, then
check that slice lengths recover intersection numbers with the flag curve.
"""
from fractions import Fraction

from okbody import Flag, complete_series, graded_semigroup, intersection_number, okounkov_body, p1xp1, projective_space
from okbody.exact_geometry import fmt_q, slice_polytope, volume


def show(D, flag, M):
    approx = okounkov_body(graded_semigroup(flag, complete_series(D, flag), M))
    verts = [tuple(fmt_q(c) for c in v) for v in approx.body.vertices]
    print(f"  flag {flag.label()}: body vertices {verts} (exact: {approx.exact})")
    print(f"  2! vol = {fmt_q(2 * volume(approx.body))}, D^2 = {fmt_q(intersection_number(D, D))}")
    for a in (0, Fraction(1, 2)):
        s = slice_polytope(approx.body, (a,))
        print(f"  slice at {fmt_q(a)}: length {fmt_q(volume(s))}")
    print(f"  Y1 . D = {fmt_q(flag.stratum_intersection(1, D))}")


P2 = projective_space(2)
print("P2, O(1): the standard simplex")
show(P2.O(1), Flag.torus(P2, [0, 1]), 6)
print("P2, O(1) with a seeded generic linear flag: still the simplex")
show(P2.O(1), Flag.generic(P2, 4), 6)

X = p1xp1()
for a, b in [(1, 2), (2, 3)]:
    print(f"P1 x P1, O({a},{b}): a rectangle [0,{a}] x [0,{b}]")
    show(X.O(a, b), Flag.torus(X, [0, 1]), 8)
