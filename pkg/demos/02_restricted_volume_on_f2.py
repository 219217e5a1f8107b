"""Restricted volumes on the Hirzebruch surface F2.

C0 is the (-2)-curve and f a fibre.  D = C0 + 2f is nef, so nothing is
subtracted.  D = C0 + f has C0 as a fixed component with ord_C0 ||D|| = 1/2,
and the restricted volume to a fibre drops from D.f = 1 to 1/2.  Three routes
are compared: the body slice, the growth of restriction ranks, and the
closed formula with its hypothesis checks.
"""
from okbody import Flag, augmented_base_locus, hirzebruch, restricted_volume
from okbody.exact_geometry import fmt_q, slice_polytope, volume
from okbody.okounkov import graded_semigroup, okounkov_body
from okbody.series_ops import complete_series, toric_stable_base_locus

F2 = hirzebruch(2)
C0, f = F2.prime(1), F2.prime(0)

for name, D, order in [("C0+2f", C0 + f * 2, [0, 1]), ("C0+f", C0 + f, [0, 3])]:
    flag = Flag.torus(F2, order)
    print(f"D = {name}, flag curve D{order[0]} through the point D{order[0]} n D{order[1]}")
    print(f"  stable base locus: {toric_stable_base_locus(D).to_json()['divisorial']}")
    print(f"  augmented base locus: {augmented_base_locus(D).locus.labels()}")
    rep = restricted_volume(D, flag, 12)
    print(f"  ranks m=1..12: {list(rep.ranks.values())}")
    print(f"  rank growth: {fmt_q(rep.estimate)} (stabilized: {rep.stabilized})")
    body = okounkov_body(graded_semigroup(flag, complete_series(D, flag), 12)).body
    print(f"  body slice at 0: {fmt_q(volume(slice_polytope(body, (0,))))}")
    fm = rep.formula
    print(f"  formula: Y.D = {fmt_q(fm.curve_degree)} minus {[c['ord'] for c in fm.corrections]} = {fmt_q(fm.value)}")
    print(f"  hypothesis checks: {[k for k, v in fm.checks.items() if v is True]}")

print("A flag whose point lies on C0 is refused for C0+f:")
bad = restricted_volume(C0 + f, Flag.torus(F2, [0, 1]), 4).formula
print(f"  failing checks: {[k for k, v in bad.checks.items() if v is False]}")
