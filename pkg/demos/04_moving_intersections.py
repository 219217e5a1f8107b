"""Moving self-intersections against dimension counts.

On P1 the series O(3m) with order >= m at 0 moves in degree 2m.  On P2 the
complete series O(2m) has 4m^2 moving intersection points (Bezout), and the
conics through three points lose the base points: m^2.  The dimension counts
converge to the same limits, but slowly.
"""
from fractions import Fraction

from okbody import complete_series, moving_self_intersection, points_subseries, projective_space
from okbody.exact_geometry import fmt_q
from okbody.series_ops import base_locus

P1 = projective_space(1)
W = points_subseries(P1.O(3), [((0,), 1)])
print("P1, O(3m) vanishing to order m at 0")
for m in (1, 4, 8, 12):
    Wm = W.level(m)
    print(f"  m={m}: moving/m = {fmt_q(Fraction(moving_self_intersection(Wm, 1), m))}, dim/m = {fmt_q(Fraction(Wm.dim, m))}")

P2 = projective_space(2)
C = complete_series(P2.O(2))
print("P2, complete O(2m)")
for m in (1, 2, 3, 4):
    Cm = C.level(m)
    mv = moving_self_intersection(Cm, 2)
    print(f"  m={m}: moving = {mv}, 2 dim/m^2 = {fmt_q(Fraction(2 * Cm.dim, m * m))}")

Q = points_subseries(P2.O(2), [((0, 0), 1), ((1, 0), 1), ((0, 1), 1)])
print("P2, conics with multiplicity >= m at three points")
print(f"  base points of level 1: {base_locus(Q, 1).labels()}")
for m in (1, 2, 3, 4):
    Qm = Q.level(m)
    mv = moving_self_intersection(Qm, 2)
    print(f"  m={m}: moving = {mv}, 2 dim/m^2 = {fmt_q(Fraction(2 * Qm.dim, m * m))}")
