"""Graded semigroups, Okounkov bodies, slices and volumes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact_geometry import (
    Polytope,
    RationalCone,
    affine_volume,
    cone_and_body,
    fmt_q,
    rvec,
    slice_polytope,
    volume,
)
from .valuation import value_set


class BodyError(ValueError):
    pass


@dataclass
class GradedSemigroup:
    """Value sets ``Gamma_m`` for ``1 <= m <= M`` (empty levels kept as empty)."""

    dim: int
    truncation: int
    levels: dict
    label: str = ""

    def points(self, upto: int | None = None) -> list:
        upto = self.truncation if upto is None else upto
        return [(v, m) for m in range(1, upto + 1) for v in self.levels.get(m, [])]

    def level(self, m: int) -> list:
        return self.levels.get(m, [])

    def counts(self) -> dict:
        return {m: len(self.levels.get(m, [])) for m in range(1, self.truncation + 1)}

    def is_nonempty(self) -> bool:
        return any(self.levels.get(m) for m in range(1, self.truncation + 1))

    def closure_failures(self, limit: int = 5) -> list:
        """Pairs violating ``Gamma_k + Gamma_l <= Gamma_{k+l}`` inside the truncation."""
        bad = []
        sets = {m: set(v) for m, v in self.levels.items()}
        for k in range(1, self.truncation + 1):
            for l in range(k, self.truncation + 1 - k):
                target = sets.get(k + l, set())
                for v in self.levels.get(k, []):
                    for w in self.levels.get(l, []):
                        s = tuple(a + b for a, b in zip(v, w))
                        if s not in target:
                            bad.append(((v, k), (w, l)))
                            if len(bad) >= limit:
                                return bad
        return bad

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "truncation": self.truncation,
            "counts": {str(m): c for m, c in self.counts().items()},
            "levels": {str(m): [list(v) for v in self.levels.get(m, [])] for m in range(1, self.truncation + 1)},
        }


def graded_semigroup(flag, series, M: int) -> GradedSemigroup:
    """``{(nu(s), m) : 0 != s in W_m, m <= M}`` computed level by level."""
    if M < 1:
        raise BodyError("truncation must be at least 1")
    levels = {}
    for m in range(1, M + 1):
        W = series.level(m)
        levels[m] = value_set(flag, W) if not W.is_zero() else []
    return GradedSemigroup(series.nvars, M, levels, getattr(series, "name", ""))


@dataclass
class BodyApprox:
    """Inner approximation ``conv(Gamma_m / m)`` plus a stabilization certificate."""

    body: Polytope
    cone: RationalCone
    exact: bool
    truncation: int
    half_body: Polytope | None = None
    counts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "exact": self.exact,
            "truncation": self.truncation,
            "body": self.body.to_json(),
            "counts": {str(m): c for m, c in self.counts.items()},
        }


def okounkov_body(gamma: GradedSemigroup) -> BodyApprox:
    """Hull of the scaled value sets; exact iff levels up to ``ceil(M/2)`` already give it."""
    pts = gamma.points()
    if not pts:
        raise BodyError("all levels of the semigroup are empty")
    cone, body = cone_and_body(pts)
    half = math.ceil(gamma.truncation / 2)
    half_pts = gamma.points(half)
    half_body = None
    exact = False
    if half_pts:
        _, half_body = cone_and_body(half_pts)
        exact = half_body.vertices == body.vertices
    return BodyApprox(body, cone, exact, gamma.truncation, half_body, gamma.counts())


def slice_semigroup(gamma: GradedSemigroup, a: Sequence) -> GradedSemigroup:
    """Points ``(m a, nu', m)`` of Gamma, returned as ``(nu', m)``."""
    a = rvec(a)
    r = len(a)
    if r >= gamma.dim and gamma.dim > 0:
        raise BodyError(f"slice prefix of length {r} needs dimension > {r}")
    levels = {}
    for m in range(1, gamma.truncation + 1):
        prefix = [m * c for c in a]
        if any(p.denominator != 1 for p in prefix):
            levels[m] = []
            continue
        prefix = tuple(int(p) for p in prefix)
        levels[m] = sorted(v[r:] for v in gamma.level(m) if v[:r] == prefix)
    return GradedSemigroup(gamma.dim - r, gamma.truncation, levels, gamma.label + f"|{[str(c) for c in a]}")


# ---------------------------------------------------------------------------
# volumes
# ---------------------------------------------------------------------------


@dataclass
class LeadingTerm:
    value: Fraction | None
    stabilized: bool
    period: int
    differences: list

    def to_json(self) -> dict:
        return {
            "value": None if self.value is None else str(self.value),
            "stabilized": self.stabilized,
            "period": self.period,
        }


def eventual_leading_coefficient(values: dict, degree: int, period: int = 1, tail: int = 2) -> LeadingTerm:
    """Leading coefficient of a sequence that is eventually a quasi-polynomial.

    Uses ``degree``-th differences with step ``period`` along multiples of the
    period; when the last ``tail`` of them agree the coefficient is
    ``Delta / (degree! period^degree)``.
    """
    ms = sorted(m for m in values if m % period == 0)
    seq = [Fraction(values[m]) for m in ms]
    diffs = seq
    for _ in range(degree):
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    if len(diffs) < tail:
        last = diffs[-1] if diffs else None
        val = None if last is None else last / (math.factorial(degree) * period ** degree)
        return LeadingTerm(val, False, period, diffs)
    end = diffs[-tail:]
    stable = all(x == end[-1] for x in end)
    return LeadingTerm(end[-1] / (math.factorial(degree) * period ** degree), stable, period, diffs)


@dataclass
class VolumeReport:
    dims: dict
    ratios: dict
    extrapolated: LeadingTerm
    body_volume: Fraction | None
    body_exact: bool
    agreement: str

    def to_json(self) -> dict:
        return {
            "dims": {str(m): d for m, d in self.dims.items()},
            "ratios": {str(m): str(r) for m, r in self.ratios.items()},
            "extrapolated": self.extrapolated.to_json(),
            "body_volume": None if self.body_volume is None else str(self.body_volume),
            "body_exact": self.body_exact,
            "agreement": self.agreement,
        }


def volume_of_series(series, M: int, flag=None, period: int | None = None) -> VolumeReport:
    """Compare ``d! dim W_m / m^d`` with ``d! vol(body)``."""
    d = series.nvars
    dims = {m: series.level(m).dim for m in range(1, M + 1)}
    nonzero = {m: k for m, k in dims.items() if k}
    if not nonzero:
        raise BodyError("series is zero at every computed level")
    ratios = {m: Fraction(math.factorial(d) * k, m ** d) for m, k in nonzero.items()}
    if period is None:
        period = series.period()
    lead = eventual_leading_coefficient(dims, d, period)
    extrap = LeadingTerm(
        None if lead.value is None else lead.value * math.factorial(d), lead.stabilized, period, lead.differences
    )
    body_volume = None
    body_exact = False
    if flag is not None:
        approx = okounkov_body(graded_semigroup(flag, series, M))
        body_volume = math.factorial(d) * volume(approx.body)
        body_exact = approx.exact
    if body_volume is None or extrap.value is None:
        agreement = "not compared"
    elif body_exact and extrap.stabilized:
        agreement = "equal" if body_volume == extrap.value else "different"
    else:
        agreement = f"consistent within truncation (gap {abs(body_volume - (extrap.value or 0))})"
    return VolumeReport(dims, ratios, extrap, body_volume, body_exact, agreement)


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------


@dataclass
class SliceComparison:
    a: tuple
    body_slice: Polytope
    semigroup_slice: Polytope | None
    contained: bool
    equal: bool
    interior_witness: tuple | None
    body_exact: bool
    slice_exact: bool

    @property
    def body_slice_measure(self) -> Fraction:
        return affine_volume(self.body_slice)

    def to_json(self) -> dict:
        return {
            "a": [fmt_q(c) for c in self.a],
            "body_slice": self.body_slice.to_json(),
            "semigroup_slice": None if self.semigroup_slice is None else self.semigroup_slice.to_json(),
            "contained": self.contained,
            "equal": self.equal,
            "interior_witness": None if self.interior_witness is None else [fmt_q(c) for c in self.interior_witness],
            "body_exact": self.body_exact,
            "slice_exact": self.slice_exact,
        }


def body_slice_compare(series, flag, a: Sequence, M: int, gamma: GradedSemigroup | None = None) -> SliceComparison:
    """Check ``Delta(Gamma|_a) <= Delta(Gamma)|_a`` and look for an interior witness."""
    a = rvec(a)
    if gamma is None:
        gamma = graded_semigroup(flag, series, M)
    approx = okounkov_body(gamma)
    sliced = slice_polytope(approx.body, a)
    sub = slice_semigroup(gamma, a)
    sub_body = None
    sub_exact = False
    if sub.is_nonempty():
        sb = okounkov_body(sub)
        sub_body, sub_exact = sb.body, sb.exact
    if sub_body is None:
        contained = True
        equal = sliced.is_empty
    else:
        contained = sliced.contains_polytope(sub_body)
        equal = contained and sub_body.vertices == sliced.vertices
    witness = None
    if not sliced.is_empty:
        c = sliced.centroid_of_vertices()
        lifted = tuple(a) + tuple(c)
        if approx.body.in_interior(lifted):
            witness = lifted
    return SliceComparison(a, sliced, sub_body, contained, equal, witness, approx.exact, sub_exact)


def toric_okounkov_body(D, flag) -> Polytope:
    """Body of a toric divisor for a torus-invariant flag: ``P_D`` in flag exponents."""
    if flag.kind != "torus":
        raise BodyError("the polytope shortcut needs a torus-invariant flag")
    from .exact_geometry import convex_hull, dot

    P = D.polytope()
    if P.is_empty:
        raise BodyError("divisor class has no sections")
    rays = D.model.rays
    pts = [tuple(dot(u, rays[j]) + D.coeffs[j] for j in flag.chart) for u in P.vertices]
    return convex_hull(pts, dim=D.model.d)
