"""The series V(D; a) on the first flag member.

Sections whose first valuation entry is at least m a are divided by the
local equation and restricted.  Two constructions are cross-checked on every
level, and the result is squeezed between the restriction of D - aA and the
complete series on the curve.
"""
from fractions import Fraction

from okbody import Flag, build_V, projective_space
from okbody.okounkov import graded_semigroup, slice_semigroup
from okbody.series_ops import complete_series, sandwich_check

P2 = projective_space(2)
D, a = P2.O(2), (Fraction(1, 2),)
for flag in (Flag.torus(P2, [0, 1]), Flag.generic(P2, 3)):
    V = build_V(D, a, flag)
    print(f"flag {flag.label()}: dim V_m for m = 1..8: {[V.level(m).dim for m in range(1, 9)]}")
    for m in (2, 4, 6):
        s = sandwich_check(V, m)
        print(f"  m={m}: lower {s['dim_lower']} <= V {s['dim_V']} <= upper {s['dim_upper']} ({s['lower']}, {s['upper']})")
    gamma = graded_semigroup(flag, complete_series(D, flag), 8)
    gv = graded_semigroup(flag, V, 8)
    same = all(sorted(gv.level(m)) == sorted(slice_semigroup(gamma, a).level(m)) for m in range(1, 9))
    print(f"  value sets of V equal the slice of the full semigroup: {same}")
