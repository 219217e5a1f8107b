"""Graded linear series and the operations built on them."""
from __future__ import annotations

import itertools
import math
import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .exact_geometry import (
    dot,
    fmt_q,
    lattice_points,
    lcm_of_denominators,
    nullspace,
    polytope_from_halfspaces,
    q,
    rvec,
    slice_polytope,
)
from .okounkov import eventual_leading_coefficient
from .poly import MultiPoly
from .spaces import Carrier, GradedSubspace
from .valuation import (
    CurvePoint,
    ToricPrime,
    _toric_term_order,
    curve_degree,
    ord_along,
    toric_asymptotic_order,
    value_set,
)
from .variety_model import (
    DivisorClass,
    Flag,
    sections,
)


class SeriesError(ValueError):
    pass


class HypothesisError(SeriesError):
    pass


# ---------------------------------------------------------------------------
# graded series
# ---------------------------------------------------------------------------


class GradedSeries:
    """``m -> W_m`` computed lazily; each level is written once and then shared.

    Levels not divisible by ``denominator`` are zero, which is how series with
    rational rates are indexed.
    """

    def __init__(
        self,
        carrier: Carrier,
        builder: Callable[[int], GradedSubspace],
        denominator: int = 1,
        kind: str = "custom",
        name: str = "",
        ambient: DivisorClass | None = None,
        meta: dict | None = None,
    ):
        self.carrier = carrier
        self._builder = builder
        self.denominator = max(int(denominator), 1)
        self.kind = kind
        self.name = name or kind
        self.ambient = ambient if ambient is not None else carrier.divisor
        self.meta = dict(meta or {})
        self._cache: dict = {}
        self._lock = threading.Lock()

    @property
    def nvars(self) -> int:
        return self.carrier.nvars

    def level(self, m: int) -> GradedSubspace:
        if m < 0:
            raise SeriesError("negative level")
        cached = self._cache.get(m)
        if cached is not None:
            return cached
        if m == 0:
            W = GradedSubspace(0, self.nvars, [MultiPoly.constant(1, self.nvars)], self.carrier)
        elif m % self.denominator:
            W = GradedSubspace.zero(m, self.nvars, self.carrier)
        else:
            W = self._builder(m)
            if W.carrier is None or W.carrier != self.carrier:
                W = W.with_carrier(self.carrier)
        with self._lock:
            return self._cache.setdefault(m, W)

    def dims(self, M: int) -> dict:
        return {m: self.level(m).dim for m in range(1, M + 1)}

    def period(self) -> int:
        return int(self.meta.get("period", self.denominator))

    def multiplicativity_failures(self, pairs: Sequence[tuple]) -> list:
        """Pairs ``(k, l)`` where some product of basis elements leaves ``W_{k+l}``."""
        bad = []
        for k, l in pairs:
            A, B, C = self.level(k), self.level(l), self.level(k + l)
            for s in A.basis:
                for t in B.basis:
                    if not C.contains(s * t):
                        bad.append((k, l))
                        break
                else:
                    continue
                break
        return bad

    def describe(self) -> dict:
        out = {"kind": self.kind, "name": self.name, "denominator": self.denominator}
        out.update(self.carrier.describe())
        for key, val in self.meta.items():
            if key != "period":
                out[key] = val
        return out

    def __repr__(self) -> str:
        return f"GradedSeries({self.name!r}, nvars={self.nvars}, denominator={self.denominator})"


def _polytope_period(D: DivisorClass) -> int:
    P = D.polytope()
    return lcm_of_denominators(c for v in P.vertices for c in v) if not P.is_empty else 1


def complete_series(D: DivisorClass, flag: Flag | None = None, chart: Sequence[int] | None = None) -> GradedSeries:
    """``C_m(X, D) = H^0(X, mD)`` in the chart of ``flag`` (or ``chart``)."""
    if chart is None:
        chart = flag.chart if flag is not None else D.model.cones[0]
    chart = tuple(chart)
    carrier = Carrier(D, chart, 0, flag)
    ell = D.denominator()
    period = math.lcm(ell, _polytope_period(D))
    return GradedSeries(
        carrier,
        lambda m: sections(D, m, chart, flag),
        ell,
        kind="complete",
        name=f"C({D.to_json()})",
        meta={"period": period},
    )


def flag_basis(D: DivisorClass, flag: Flag, m: int) -> GradedSubspace:
    """``H^0(X, mD)`` rewritten in flag coordinates, reduced in lexicographic order."""
    W = sections(D, m, flag.chart, flag)
    if flag.kind == "torus" or W.is_zero():
        return W
    return W.map(flag.to_flag_coords)


def restrict_series(W: GradedSeries, r: int, flag: Flag | None = None) -> GradedSeries:
    """Restriction of every level to ``Y_r``; the result lives in flag coordinates."""
    flag = flag if flag is not None else W.carrier.flag
    if flag is None:
        raise SeriesError("restriction needs a flag")
    r0 = W.carrier.stratum
    d = flag.d
    if not r0 < r <= d:
        raise SeriesError(f"cannot restrict from Y_{r0} to Y_{r}")
    if tuple(W.carrier.chart) != tuple(flag.chart):
        raise SeriesError("series and flag use different charts")
    carrier = Carrier(W.carrier.divisor, flag.chart, r, flag)
    steps = r - r0

    def build(m: int) -> GradedSubspace:
        V = W.level(m)
        if V.is_zero():
            return GradedSubspace.zero(m, d - r, carrier)
        if r0 == 0:
            polys = [flag.to_flag_coords(p).restrict_first(steps) for p in V.basis]
        else:
            polys = [p.restrict_first(steps) for p in V.basis]
        return GradedSubspace(m, d - r, polys, carrier)

    return GradedSeries(
        carrier, build, W.denominator, kind="restricted", name=f"{W.name}|Y{r}",
        ambient=W.ambient, meta={"period": W.period()},
    )


@dataclass
class MuMorphism:
    """``f_m(t) = t * s^m`` from ``V_m`` to sections of ``L + M'``."""

    source: GradedSeries
    section: MultiPoly
    target_divisor: DivisorClass | None = None

    def apply(self, m: int, t: MultiPoly) -> MultiPoly:
        return t * self.section ** m

    def image(self, m: int) -> GradedSubspace:
        V = self.source.level(m)
        carrier = self.source.carrier
        if self.target_divisor is not None:
            carrier = Carrier(self.target_divisor, carrier.chart, carrier.stratum, carrier.flag)
        return GradedSubspace(m, V.nvars, [self.apply(m, t) for t in V.basis], carrier)

    def preimage(self, m: int, U: GradedSubspace) -> GradedSubspace:
        """``{t in V_m : t s^m in U}``."""
        V = self.source.level(m)
        if V.is_zero():
            return V
        images = [self.apply(m, t) for t in V.basis]
        cols = sorted({e for p in images + list(U.basis) for e in p.terms})
        # unknowns: coefficients on V's basis, then on U's basis
        rows = []
        for e in cols:
            rows.append([p.coefficient(e) for p in images] + [-u.coefficient(e) for u in U.basis])
        kernel = nullspace(rows, V.dim + U.dim)
        polys = []
        for vec in kernel:
            acc = MultiPoly.zero(V.nvars)
            for c, t in zip(vec[: V.dim], V.basis):
                if c:
                    acc = acc + t.scale(c)
            polys.append(acc)
        return GradedSubspace(m, V.nvars, polys, V.carrier)

    def preimage_series(self, U: GradedSeries) -> GradedSeries:
        return GradedSeries(
            self.source.carrier, lambda m: self.preimage(m, U.level(m)), self.source.denominator,
            kind="preimage", name=f"mu^-1({U.name})", ambient=self.source.ambient,
        )


def mu_morphism(V: GradedSeries, s: MultiPoly, target_divisor: DivisorClass | None = None) -> MuMorphism:
    if s.is_zero():
        raise SeriesError("mu(s) needs a nonzero section")
    if s.nvars != V.nvars:
        raise SeriesError("section and series use different coordinates")
    return MuMorphism(V, s, target_divisor)


# ---------------------------------------------------------------------------
# V(D; a)
# ---------------------------------------------------------------------------


def shifted_divisor(D: DivisorClass, a: Sequence, flag: Flag) -> DivisorClass:
    """``D - sum a_i A_i``."""
    out = D
    for i, ai in enumerate(a, start=1):
        out = out - flag.hyperplane_class(i) * ai
    return out


def _prefix_route(D, a, flag, m, carrier) -> GradedSubspace:
    W = flag_basis(D, flag, m)
    prefix = tuple(int(m * c) for c in a)
    r = len(a)
    polys = [p.coefficient_of_prefix(prefix) for p in W.basis if p.lex_min_exponent()[:r] == prefix]
    return GradedSubspace(m, flag.d - r, polys, carrier)


def _inductive_route(D, a, flag, m, carrier) -> GradedSubspace:
    W = flag_basis(D, flag, m)
    for c in a:
        t = int(m * c)
        W = W.filter_min_degree(0, t)
        W = W.map(lambda p, t=t: p.divide_by_var_power(0, t).restrict_first(1), nvars=W.nvars - 1)
    return W.with_carrier(carrier)


def build_V(D: DivisorClass, a: Sequence, flag: Flag, check_big: bool = True, cross_check: bool = True) -> GradedSeries:
    """The series ``V(D; a)`` on ``Y_r``.

    Level ``m`` is nonzero only when every ``m a_i`` is an integer.  It is
    built from the echelon basis by keeping the rows whose leading exponent
    starts with ``m a`` and, when ``cross_check`` is set, compared against the
    inductive construction (filter by order along ``Y_i``, divide, restrict).
    """
    a = rvec(a)
    r = len(a)
    if r >= flag.d:
        raise SeriesError(f"need r < d, got r={r}, d={flag.d}")
    if any(c < 0 for c in a):
        raise SeriesError("rates must be nonnegative")
    Dp = shifted_divisor(D, a, flag)
    if check_big and not Dp.is_big():
        raise SeriesError(f"a={[fmt_q(c) for c in a]} leaves the big range: D - sum a_i A_i is not big")
    ell = lcm_of_denominators(a)
    carrier = Carrier(Dp, flag.chart, r, flag, label="V")

    def build(m: int) -> GradedSubspace:
        direct = _prefix_route(D, a, flag, m, carrier)
        if cross_check:
            other = _inductive_route(D, a, flag, m, carrier)
            if not direct.same_space(other):
                raise SeriesError(f"the two constructions of V_{m} disagree")
        return direct

    period = ell
    if flag.kind == "torus":
        from .okounkov import toric_okounkov_body

        body = toric_okounkov_body(D, flag)
        if r:
            body = slice_polytope(body, a)
        if not body.is_empty:
            period = math.lcm(ell, lcm_of_denominators(c for v in body.vertices for c in v))
    else:
        period = math.lcm(ell, _polytope_period(D))
    return GradedSeries(
        carrier, build, ell, kind="V", name=f"V({D.to_json()};{[fmt_q(c) for c in a]})",
        ambient=D, meta={"a": [fmt_q(c) for c in a], "period": period},
    )


def restricted_from_X(Dp: DivisorClass, flag: Flag, r: int, m: int) -> GradedSubspace:
    """``C_m(X, D')|_{Y_r}`` in flag coordinates."""
    W = sections(Dp, m, flag.chart, flag)
    carrier = Carrier(Dp, flag.chart, r, flag)
    if W.is_zero():
        return GradedSubspace.zero(m, flag.d - r, carrier)
    polys = [flag.to_flag_coords(p).restrict_first(r) for p in W.basis]
    return GradedSubspace(m, flag.d - r, polys, carrier)


def complete_on_stratum(Dp: DivisorClass, flag: Flag, r: int, m: int) -> GradedSubspace:
    """``H^0(Y_r, m D'|_{Y_r})`` in flag coordinates."""
    d = flag.d
    n = d - r
    carrier = Carrier(Dp, flag.chart, r, flag)
    if not Dp.integral_at(m):
        return GradedSubspace.zero(m, n, carrier)
    model = Dp.model
    if flag.kind == "torus":
        chart = flag.chart
        tau = chart[:r]
        w = model.dual_basis(chart)
        offs = [m * Dp.coeffs[j] for j in chart]
        hs = []
        for j, v in enumerate(model.rays):
            if j in tau or not model.is_cone(tau + (j,)):
                continue
            # <U(e), v_j> + m a_j >= 0 with U(e) = sum_k (e_k - offs_k) w_k, e_k = 0 for k < r
            coeffs = [dot(w[k], v) for k in range(r, d)]
            const = -sum(offs[k] * dot(w[k], v) for k in range(d)) + m * Dp.coeffs[j]
            hs.append((tuple(-c for c in coeffs), const))
        P = polytope_from_halfspaces(hs, n)
        monos = [MultiPoly({tuple(e): 1}, n) for e in lattice_points(P)]
        return GradedSubspace(m, n, monos, carrier)
    if model.kind == "projective_space":
        N = m * sum(Dp.coeffs)
    elif r == d - 1:
        N = m * flag.curve_pairing(Dp)
    else:
        raise SeriesError("sections on generic surfaces are only available on projective space")
    if N < 0:
        return GradedSubspace.zero(m, n, carrier)
    N = int(N)
    monos = [
        MultiPoly({e: 1}, n)
        for e in itertools.product(range(N + 1), repeat=n)
        if sum(e) <= N
    ]
    return GradedSubspace(m, n, monos, carrier)


def points_subseries(D: DivisorClass, points: Sequence[tuple], chart: Sequence[int] | None = None, flag: Flag | None = None) -> GradedSeries:
    """Sections of ``mD`` with multiplicity ``>= ceil(rate m)`` at chart points.

    ``points`` is a list of ``(coordinates, rate)``.
    """
    if chart is None:
        chart = flag.chart if flag is not None else D.model.cones[0]
    chart = tuple(chart)
    pts = [(rvec(p), q(rate)) for p, rate in points]
    carrier = Carrier(D, chart, 0, flag, label="points")
    n = D.model.d

    def build(m: int) -> GradedSubspace:
        full = sections(D, m, chart, flag)
        if full.is_zero():
            return full.with_carrier(carrier)
        rows = []
        for p, rate in pts:
            k = math.ceil(rate * m)
            if k <= 0:
                continue
            shifted = [b.shift(p) for b in full.basis]
            for e in itertools.product(range(k), repeat=n):
                if sum(e) < k:
                    rows.append([s.coefficient(e) for s in shifted])
        if not rows:
            return full.with_carrier(carrier)
        kernel = nullspace(rows, full.dim)
        polys = []
        for vec in kernel:
            acc = MultiPoly.zero(n)
            for c, b in zip(vec, full.basis):
                if c:
                    acc = acc + b.scale(c)
            polys.append(acc)
        return GradedSubspace(m, n, polys, carrier)

    return GradedSeries(
        carrier, build, D.denominator(), kind="points",
        name=f"points({D.to_json()};{[([fmt_q(c) for c in p], fmt_q(r)) for p, r in pts]})",
        meta={"points": [[[fmt_q(c) for c in p], fmt_q(r)] for p, r in pts], "period": D.denominator()},
    )


# ---------------------------------------------------------------------------
# base loci
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitClosure:
    """Closure of the torus orbit of a cone (on the carrier's stratum)."""

    cone: tuple

    def label(self) -> str:
        return "V(" + ",".join(map(str, self.cone)) + ")"


@dataclass(frozen=True)
class PolyDivisor:
    """An irreducible factor of the fixed part, in the carrier's coordinates."""

    poly: MultiPoly

    def label(self) -> str:
        return f"{{{self.poly} = 0}}"


@dataclass(frozen=True)
class ChartPoint:
    coords: tuple

    def label(self) -> str:
        return "(" + ", ".join(fmt_q(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class AlgebraicPoints:
    """Conjugate points whose coordinates are not rational."""

    description: str

    def label(self) -> str:
        return self.description


@dataclass
class BaseLocusDescriptor:
    level: object
    carrier_dim: int
    divisorial: list = field(default_factory=list)
    points: list = field(default_factory=list)
    other: list = field(default_factory=list)
    stabilized: bool | None = None
    method: str = ""
    notes: list = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.divisorial or self.points or self.other)

    def labels(self) -> list:
        out = [c.label() for c, _ in self.divisorial]
        out += [p.label() for p, _ in self.points]
        out += [c.label() for c, _ in self.other]
        return sorted(out)

    def divisorial_labels(self) -> list:
        return sorted(c.label() for c, _ in self.divisorial)

    def multiplicity(self, label: str):
        for c, k in self.divisorial + self.points + self.other:
            if c.label() == label:
                return k
        return None

    def to_json(self) -> dict:
        def enc(items):
            return [{"component": c.label(), "multiplicity": None if k is None else str(k)} for c, k in items]

        return {
            "level": self.level,
            "carrier_dim": self.carrier_dim,
            "divisorial": enc(self.divisorial),
            "points": enc(self.points),
            "other": enc(self.other),
            "stabilized": self.stabilized,
            "method": self.method,
            "notes": list(self.notes),
        }


def _stratum_star(model, tau: tuple) -> list:
    return [j for j in range(model.nrays) if j not in tau and model.is_cone(tau + (j,))]


def _orbit_faces(model, tau: tuple) -> list:
    star = _stratum_star(model, tau)
    out = []
    for k in range(1, model.d - len(tau) + 1):
        for S in itertools.combinations(star, k):
            if model.is_cone(tau + S):
                out.append(S)
    return out


def _minimal(sets: list) -> list:
    out = []
    for S in sorted(sets, key=lambda s: (len(s), s)):
        if not any(set(T) <= set(S) for T in out):
            out.append(S)
    return out


def _toric_descriptor(level, dim_carrier, orders_of: Callable[[tuple], Fraction], faces: list, method: str) -> BaseLocusDescriptor:
    base = [S for S in faces if orders_of(S) > 0]
    comps = _minimal(base)
    desc = BaseLocusDescriptor(level, dim_carrier, method=method)
    for S in comps:
        if len(S) == 1:
            item = (ToricPrime(S[0]), orders_of(S))
            if dim_carrier == 1:
                desc.points.append((OrbitClosure(S), orders_of(S)))
            else:
                desc.divisorial.append(item)
        elif len(S) == dim_carrier:
            desc.points.append((OrbitClosure(S), None))
        else:
            desc.other.append((OrbitClosure(S), None))
    return desc


def _is_monomial_space(W: GradedSubspace) -> bool:
    return all(len(p.terms) == 1 for p in W.basis)


def _toric_level_locus(W: GradedSubspace) -> BaseLocusDescriptor:
    carrier = W.carrier
    model = carrier.divisor.model
    tau = tuple(carrier.chart[: carrier.stratum])
    faces = _orbit_faces(model, tau)
    monos = [p.lex_min_exponent() for p in W.basis]
    cache = {}

    def orders(e):
        if e not in cache:
            cache[e] = {j: _toric_term_order(carrier, W.level, e, j) for j in _stratum_star(model, tau)}
        return cache[e]

    def orders_of(S):
        if len(S) == 1:
            return min(orders(e)[S[0]] for e in monos)
        return min(sum(orders(e)[j] for j in S) for e in monos)

    return _toric_descriptor(W.level, model.d - len(tau), orders_of, faces, "torus orbits")


def _curve_level_locus(W: GradedSubspace) -> BaseLocusDescriptor:
    desc = BaseLocusDescriptor(W.level, 1, method="gcd on curve")
    g = W.basis[0]
    for p in W.basis[1:]:
        g = g.gcd(p)
    for fac, k in g.factor():
        if fac.total_degree() == 1:
            root = -fac.coefficient((0,)) / fac.coefficient((1,))
            desc.points.append((CurvePoint(root), Fraction(k)))
        else:
            desc.points.append((AlgebraicPoints(f"roots of {fac}"), Fraction(k)))
    inf = ord_along(CurvePoint("inf"), W)
    if inf > 0:
        desc.points.append((CurvePoint("inf"), inf))
    return desc


def _random_combo(W_polys: Sequence[MultiPoly], rng: random.Random) -> MultiPoly:
    acc = MultiPoly.zero(W_polys[0].nvars)
    for p in W_polys:
        acc = acc + p.scale(rng.randint(-50, 50) or 1)
    return acc


def _affine_common_zeros(polys: Sequence[MultiPoly], seed: int = 7) -> list:
    """Common zeros in the affine plane of gcd-free polynomials."""
    if any(p.total_degree() == 0 for p in polys):
        return []
    if len(polys) == 1:
        raise SeriesError("a single non-constant polynomial has infinitely many zeros")
    rng = random.Random(seed)
    h = None
    for _ in range(3):
        f, g = _random_combo(polys, rng), _random_combo(polys, rng)
        res = f.resultant(g, 1)
        h = res if h is None else h.gcd(res)
    if h.is_zero():
        raise SeriesError("base locus is not finite after removing the fixed part")
    out = []
    uni = MultiPoly({(e[0],): c for e, c in h.terms.items()}, 1)
    for fac, _ in uni.factor():
        if fac.total_degree() != 1:
            out.append((AlgebraicPoints(f"x1 a root of {fac}"), None))
            continue
        x0 = -fac.coefficient((0,)) / fac.coefficient((1,))
        g = None
        for p in polys:
            r = p.substitute(0, x0)
            g = r if g is None else g.gcd(r)
        if g is None or g.total_degree() <= 0:
            continue
        for gf, _ in g.factor():
            if gf.total_degree() == 1:
                y0 = -gf.coefficient((0,)) / gf.coefficient((1,))
                out.append((ChartPoint((x0, y0)), None))
            else:
                out.append((AlgebraicPoints(f"x1={fmt_q(x0)}, x2 a root of {gf}"), None))
    return out


def _plane_level_locus(W: GradedSubspace) -> BaseLocusDescriptor:
    carrier = W.carrier
    D = carrier.divisor
    model = D.model
    desc = BaseLocusDescriptor(W.level, 2, method="gcd and resultants")
    g = W.basis[0]
    for p in W.basis[1:]:
        g = g.gcd(p)
    for fac, k in g.factor():
        desc.divisorial.append((PolyDivisor(fac), Fraction(k)))
    if carrier.stratum == 0:
        for j in range(model.nrays):
            if j in carrier.chart:
                continue
            k = ord_along(ToricPrime(j), W)
            if k > 0:
                desc.divisorial.append((ToricPrime(j), k))
    free = [p.exact_divide(g) for p in W.basis] if g.total_degree() > 0 else list(W.basis)
    desc.points.extend(_affine_common_zeros(free))
    if carrier.stratum == 0 and any(j not in carrier.chart for j in range(model.nrays)):
        desc.notes.append("isolated base points off the chart are not searched")
    return desc


def base_locus_level(W: GradedSubspace) -> BaseLocusDescriptor:
    if W.is_zero():
        raise SeriesError("base locus of the zero space is undefined")
    carrier = W.carrier
    flag = carrier.flag
    toric_ok = carrier.stratum == 0 or (flag is not None and flag.kind == "torus")
    if toric_ok and _is_monomial_space(W):
        return _toric_level_locus(W)
    if W.nvars == 1:
        return _curve_level_locus(W)
    if W.nvars == 2:
        return _plane_level_locus(W)
    raise SeriesError("base loci of non-monomial spaces are supported on curves and surfaces")


def toric_stable_base_locus(D: DivisorClass) -> BaseLocusDescriptor:
    """``B(D)`` for a toric Q-divisor, read off the faces of ``P_D``."""
    P = D.polytope()
    if P.is_empty:
        raise SeriesError("divisor class has no sections at any level")
    model = D.model

    def orders_of(S):
        return min(sum(dot(u, model.rays[j]) + D.coeffs[j] for j in S) for u in P.vertices)

    desc = _toric_descriptor("stable", model.d, orders_of, _orbit_faces(model, ()), "polytope faces")
    desc.stabilized = True
    return desc


def base_locus(W: GradedSeries, m="stable", M: int = 12) -> BaseLocusDescriptor:
    """Base locus of one level, or the stable base locus over levels ``<= M``."""
    if m != "stable":
        return base_locus_level(W.level(int(m)))
    if W.kind == "complete" and W.carrier.stratum == 0:
        return toric_stable_base_locus(W.carrier.divisor)
    levels = [k for k in range(1, M + 1) if not W.level(k).is_zero()]
    if not levels:
        raise SeriesError("series is zero at every computed level")
    per = {k: base_locus_level(W.level(k)) for k in levels}
    common = set(per[levels[0]].labels())
    for k in levels[1:]:
        common &= set(per[k].labels())
    last = per[levels[-1]]
    desc = BaseLocusDescriptor("stable", last.carrier_dim, method="intersection over levels")
    for attr in ("divisorial", "points", "other"):
        for c, _ in getattr(last, attr):
            if c.label() in common:
                getattr(desc, attr).append((c, None))
    tail = levels[-3:]
    desc.stabilized = len(tail) >= 3 and all(sorted(per[k].labels()) == sorted(common) for k in tail)
    desc.notes.append(f"intersection of Bs(W_m) over {len(levels)} nonzero levels")
    return desc


def verify_components(desc: BaseLocusDescriptor, W: GradedSubspace) -> bool:
    """Every listed component lies in the common zero set of the basis."""
    for comp, _ in desc.divisorial + desc.points + desc.other:
        for p in W.basis:
            if isinstance(comp, ToricPrime):
                ok = _toric_term_order(W.carrier, W.level, p.lex_min_exponent(), comp.ray) > 0 if len(p.terms) == 1 else None
                if ok is None:
                    ok = min(_toric_term_order(W.carrier, W.level, e, comp.ray) for e in p.terms) > 0
            elif isinstance(comp, OrbitClosure):
                ok = all(
                    any(_toric_term_order(W.carrier, W.level, e, j) > 0 for j in comp.cone) for e in p.terms
                )
            elif isinstance(comp, CurvePoint):
                from .valuation import ord_poly

                ok = ord_poly(comp, p, W.carrier, W.level) > 0
            elif isinstance(comp, PolyDivisor):
                try:
                    p.exact_divide(comp.poly)
                    ok = True
                except ValueError:
                    ok = False
            elif isinstance(comp, ChartPoint):
                ok = p.evaluate(comp.coords) == 0
            else:
                ok = True
            if not ok:
                return False
    return True


@dataclass
class AugmentedLocus:
    locus: BaseLocusDescriptor
    epsilon: Fraction
    stabilized: bool
    ladder: list
    reference_ample: DivisorClass

    def to_json(self) -> dict:
        return {
            "locus": self.locus.to_json(),
            "epsilon": str(self.epsilon),
            "stabilized": self.stabilized,
            "ladder": self.ladder,
            "reference_ample": self.reference_ample.to_json(),
        }


EPSILON_LADDER = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))


def augmented_base_locus(D: DivisorClass, M: int | None = None) -> AugmentedLocus:
    """``B_+(D) = B(D - eps A)`` along the ladder, stopping at the first repeat."""
    if not D.is_big():
        raise SeriesError("augmented base locus needs a big divisor")
    A = D.model.reference_ample()
    prev = None
    ladder = []
    for eps in EPSILON_LADDER:
        E = D - A * eps
        if not E.is_big():
            ladder.append({"epsilon": str(eps), "locus": None, "note": "D - eps A not big"})
            continue
        loc = toric_stable_base_locus(E)
        ladder.append({"epsilon": str(eps), "locus": loc.labels()})
        if prev is not None and prev.labels() == loc.labels():
            return AugmentedLocus(loc, eps, True, ladder, A)
        prev = loc
    if prev is None:
        raise SeriesError("D - eps A is not big for any eps on the ladder")
    return AugmentedLocus(prev, EPSILON_LADDER[-1], False, ladder, A)


# ---------------------------------------------------------------------------
# restricted volume
# ---------------------------------------------------------------------------


def _component_cones(desc: BaseLocusDescriptor) -> list:
    out = []
    for c, _ in desc.divisorial:
        out.append((c.ray,))
    for c, _ in desc.points + desc.other:
        if isinstance(c, OrbitClosure):
            out.append(tuple(c.cone))
    return out


def curve_inside_locus(flag: Flag, desc: BaseLocusDescriptor) -> bool:
    """Is ``Y_{d-1}`` inside one of the (torus-invariant) components?"""
    if flag.kind != "torus":
        return False
    tau = set(flag.stratum_cone(flag.d - 1))
    return any(set(k) <= tau for k in _component_cones(desc))


@dataclass
class FormulaResult:
    value: Fraction
    curve_degree: Fraction
    corrections: list
    checks: dict
    exact: bool

    @property
    def hypotheses_ok(self) -> bool:
        return all(v is True for k, v in self.checks.items() if not k.startswith("note"))

    def to_json(self) -> dict:
        return {
            "value": str(self.value),
            "curve_degree": str(self.curve_degree),
            "corrections": self.corrections,
            "checks": self.checks,
            "exact": self.exact,
        }


def _point_cone(flag: Flag, j: int, place) -> tuple:
    """Cone whose orbit contains the intersection point of the flag curve with ``D_j``."""
    if flag.kind == "torus":
        tau = flag.stratum_cone(flag.d - 1)
        return tuple(sorted(tau + (j,)))
    if place == "inf":
        lam = [Fraction(0)] * flag.d
        for k, ck in enumerate(flag.curve_direction()):
            if ck:
                lam = [a - b for a, b in zip(lam, flag.model.rays[flag.chart[k]])]
        return tuple(sorted(flag.model.cone_of_vector(lam)[0]))
    c = flag.curve_direction()
    cone = []
    for k in range(flag.d):
        if flag.point[k] + place * c[k] == 0:
            cone.append(flag.chart[k])
    return tuple(sorted(cone))


def restricted_vol_formula(D: DivisorClass, flag: Flag, strict: bool = True) -> FormulaResult:
    """``Y_{d-1} . D - sum_i sum_{p in Y n E_i} ord_{E_i} ||D||`` with hypothesis checks."""
    if not D.is_big():
        raise SeriesError("the restricted volume formula needs a big divisor")
    stable = toric_stable_base_locus(D)
    plus = augmented_base_locus(D)
    comps = _component_cones(stable)
    meets = flag.curve_meets()
    deg = flag.curve_pairing(D)
    checks: dict = {}
    corrections = []
    total = Fraction(0)
    transversal = True
    very_proper = True
    for E, _ in stable.divisorial:
        j = E.ray
        ordE = toric_asymptotic_order(D, j)
        for place, mult in meets[j]:
            if place == "contained":
                transversal = False
                continue
            if mult != 1:
                transversal = False
            pc = set(_point_cone(flag, j, place))
            for k in comps:
                if k != (j,) and set(k) <= pc:
                    very_proper = False
            corrections.append({"component": E.label(), "point": str(place), "multiplicity": str(mult), "ord": str(ordE)})
            total += mult * ordE
    checks["transversal"] = transversal
    checks["very_proper"] = very_proper
    if flag.kind == "torus":
        endpoint = set(flag.chart)
        checks["point_outside_B"] = not any(set(k) <= endpoint for k in comps)
    else:
        checks["point_outside_B"] = all(c != 0 for c in flag.point)
    checks["curve_outside_B_plus"] = not curve_inside_locus(flag, plus.locus)
    checks["note_embedded_components"] = "reduced base loci only; embedded components are not examined"
    res = FormulaResult(deg - total, deg, corrections, checks, True)
    if strict and not res.hypotheses_ok:
        failing = [k for k, v in checks.items() if v is False]
        raise HypothesisError(f"hypothesis checks failed: {failing}")
    return res


@dataclass
class RestrictedVolumeReport:
    ranks: dict
    ratios: dict
    estimate: Fraction | None
    stabilized: bool
    period: int
    formula: FormulaResult | None

    def to_json(self) -> dict:
        return {
            "ranks": {str(m): r for m, r in self.ranks.items()},
            "ratios": {str(m): str(v) for m, v in self.ratios.items()},
            "estimate": None if self.estimate is None else str(self.estimate),
            "stabilized": self.stabilized,
            "period": self.period,
            "formula": None if self.formula is None else self.formula.to_json(),
        }


def restricted_volume(D: DivisorClass, flag: Flag, M: int, with_formula: bool = True) -> RestrictedVolumeReport:
    """Ranks of ``H^0(X, mD) -> H^0(Y_{d-1}, mD|)`` and their growth rate."""
    if D.is_big():
        plus = augmented_base_locus(D)
        if curve_inside_locus(flag, plus.locus):
            raise HypothesisError("the flag curve lies inside the augmented base locus")
    C = complete_series(D, flag)
    R = restrict_series(C, flag.d - 1, flag)
    ranks = R.dims(M)
    ratios = {m: Fraction(k, m) for m, k in ranks.items() if k}
    period = R.period()
    lead = eventual_leading_coefficient(ranks, 1, period)
    formula = None
    if with_formula and D.is_big():
        formula = restricted_vol_formula(D, flag, strict=False)
    return RestrictedVolumeReport(ranks, ratios, lead.value, lead.stabilized, period, formula)


# ---------------------------------------------------------------------------
# moving self-intersection
# ---------------------------------------------------------------------------


def _gcd_all(polys: Sequence[MultiPoly]) -> MultiPoly:
    g = polys[0]
    for p in polys[1:]:
        g = g.gcd(p)
    return g


def _moving_curve(W: GradedSubspace) -> int:
    N = curve_degree(W.carrier, W.level)
    g = _gcd_all(list(W.basis))
    inf = N - max(p.total_degree() for p in W.basis)
    return int(N - g.total_degree() - inf)


def _random_projective(rng: random.Random) -> list:
    while True:
        T = [[Fraction(rng.randint(-9, 9)) for _ in range(3)] for _ in range(3)]
        from .exact_geometry import det

        if det(T) != 0:
            return T


def _moving_plane_once(free: Sequence[MultiPoly], N: int, rng: random.Random) -> int:
    T = _random_projective(rng)
    resultants = []
    for _ in range(3):
        f, g = _random_combo(free, rng), _random_combo(free, rng)
        fh, gh = f.homogenize(N), g.homogenize(N)
        # (Z, x1, x2) = T (1, s, t): substitute and keep the affine chart Z' = 1
        images = []
        for row in T:
            images.append(MultiPoly({(0, 0): row[0], (1, 0): row[1], (0, 1): row[2]}, 2))
        ft, gt = fh.compose(images), gh.compose(images)
        if ft.coefficient((0, N)) == 0 or gt.coefficient((0, N)) == 0:
            raise SeriesError("projection is not generic")
        res = ft.resultant(gt, 1)
        if res.is_zero():
            raise SeriesError("members share a component")
        resultants.append(MultiPoly({(e[0],): c for e, c in res.terms.items()}, 1))
    h = resultants[0]
    for r in resultants[1:]:
        h = h.gcd(r)
    total = N * N
    at_inf = min(total - r.total_degree() for r in resultants)
    return total - h.total_degree() - at_inf


def moving_self_intersection(W: GradedSubspace, d: int, seed: int = 0, attempts: int = 5) -> int:
    """``(W_m)^{[d]}`` for ``d = 1`` (curves) or ``d = 2`` (the projective plane)."""
    if W.is_zero():
        raise SeriesError("moving self-intersection of the zero space")
    if d == 1:
        if W.nvars != 1:
            raise SeriesError("d=1 needs a curve carrier")
        return _moving_curve(W)
    if d != 2:
        raise SeriesError("moving self-intersection is implemented for d = 1, 2")
    carrier = W.carrier
    model = carrier.divisor.model
    if W.nvars != 2 or model.kind != "projective_space" or carrier.stratum != 0:
        raise SeriesError("d=2 moving self-intersection is implemented on the projective plane")
    N = int(W.level * sum(carrier.divisor.coeffs))
    basis = list(W.basis)
    g = _gcd_all(basis)
    free = [p.exact_divide(g) for p in basis] if g.total_degree() > 0 else basis
    Nf = N - max(g.total_degree(), 0)
    if Nf == 0:
        return 0
    if len(free) == 1:
        raise SeriesError("a single moving member has no finite self-intersection")
    last_error = None
    for attempt in range(attempts):
        try:
            a = _moving_plane_once(free, Nf, random.Random(seed * 1009 + 2 * attempt))
            b = _moving_plane_once(free, Nf, random.Random(seed * 1009 + 2 * attempt + 1))
        except SeriesError as exc:
            last_error = exc
            continue
        if a == b:
            return a
        last_error = SeriesError(f"seed pair disagrees ({a} vs {b})")
    raise SeriesError(f"moving self-intersection failed after {attempts} attempts: {last_error}")


# ---------------------------------------------------------------------------
# bounded valuations, growth and separation, sandwich and base-locus bounds
# ---------------------------------------------------------------------------


def valuation_bound(D: DivisorClass, flag: Flag) -> int:
    """An integer ``b`` with ``nu_i(s) <= m b`` for every section of ``mD``."""
    P = D.polytope()
    best = Fraction(0)
    for u in P.vertices:
        e = [dot(u, D.model.rays[j]) + D.coeffs[j] for j in flag.chart]
        best = max(best, sum(e))
    return max(1, math.ceil(best))


def sandwich_check(V: GradedSeries, m: int) -> dict:
    """``C_m(X, D')|_{Y_r} <= V_m <= C_m(Y_r, D'|_{Y_r})``."""
    flag = V.carrier.flag
    r = V.carrier.stratum
    Dp = V.carrier.divisor
    Vm = V.level(m)
    if m % V.denominator:
        return {"level": m, "skipped": "level not divisible", "lower": True, "upper": True}
    lower = restricted_from_X(Dp, flag, r, m)
    out = {"level": m, "dim_lower": lower.dim, "dim_V": Vm.dim}
    out["lower"] = Vm.contains_space(lower)
    try:
        upper = complete_on_stratum(Dp, flag, r, m)
        out["dim_upper"] = upper.dim
        out["upper"] = upper.contains_space(Vm)
    except SeriesError as exc:
        out["upper"] = None
        out["upper_note"] = str(exc)
    if r == 1:
        out["r1_equality"] = lower.same_space(Vm)
    return out


def lemma_base_locus_check(D: DivisorClass, a: Sequence, flag: Flag, M: int) -> dict:
    """``ord_F(V_m(D;a)) >= ord_E(|mD|)`` for divisorial ``E <= B(D)`` and ``F <= Y_r n E``."""
    V = build_V(D, a, flag)
    C = complete_series(D, flag)
    stable = toric_stable_base_locus(D)
    r = len(a)
    rows = []
    ok = True
    for E, _ in stable.divisorial:
        j = E.ray
        targets = []
        if flag.kind == "torus":
            tau = flag.stratum_cone(r)
            if j in tau:
                rows.append({"component": E.label(), "note": "Y_r lies inside E"})
                continue
            if flag.model.is_cone(tau + (j,)):
                targets.append(ToricPrime(j))
        elif r == flag.d - 1:
            for place, _ in flag.curve_meets()[j]:
                targets.append(CurvePoint(place))
        else:
            rows.append({"component": E.label(), "note": "components of Y_r n E not enumerated"})
            continue
        for F in targets:
            for m in range(1, M + 1):
                Vm = V.level(m)
                if Vm.is_zero():
                    continue
                lhs = ord_along(F, Vm)
                rhs = ord_along(ToricPrime(j), C.level(m))
                good = lhs >= rhs
                ok = ok and good
                rows.append({"E": E.label(), "F": F.label(), "m": m, "ord_F": str(lhs), "ord_E": str(rhs), "ok": good})
    return {"ok": ok, "rows": rows, "a": [fmt_q(c) for c in a]}


def check_conditions(W: GradedSeries, M: int, flag: Flag | None = None, seed: int = 0) -> dict:
    """Report on bounded valuations, growth and separation (a heuristic, flagged as such) and the sandwich."""
    flag = flag if flag is not None else W.carrier.flag
    report: dict = {}
    # bounded valuations
    if flag is not None:
        b = valuation_bound(W.ambient, flag)
        worst = None
        okA = True
        for m in range(1, M + 1):
            Wm = W.level(m)
            if Wm.is_zero():
                continue
            for v in value_set(flag, Wm):
                if any(x > m * b for x in v):
                    okA = False
                    worst = (m, v)
        report["bounded_values"] = {"pass": okA, "b": b, "violation": None if worst is None else [worst[0], list(worst[1])]}
    else:
        report["bounded_values"] = {"pass": None, "note": "no flag supplied"}
    # growth and separation, heuristic
    n = W.nvars
    levels = [m for m in range(1, M + 1) if m % W.denominator == 0]
    dims = {m: W.level(m).dim for m in levels}
    growth = [Fraction(math.factorial(n) * dims[m], m ** n) for m in levels]
    grows = bool(levels) and dims[levels[-1]] > 0 and all(
        dims[b_] >= dims[a_] for a_, b_ in zip(levels, levels[1:])
    )
    rng = random.Random(seed)
    top = W.level(levels[-1]) if levels else None
    separated = 0
    trials = 6
    if top is not None and top.dim >= 2:
        for _ in range(trials):
            p = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n)]
            r_ = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n)]
            vp = [s.evaluate(p) for s in top.basis]
            vr = [s.evaluate(r_) for s in top.basis]
            if any(vp[i] * vr[j] != vp[j] * vr[i] for i in range(len(vp)) for j in range(i + 1, len(vp))):
                separated += 1
    fixed = None
    if top is not None and not top.is_zero():
        g = _gcd_all(list(top.basis))
        if g.total_degree() > 0:
            fixed = str(g)
    report["growth_and_separation"] = {
        "pass": grows and separated == trials,
        "heuristic": True,
        "verdict": "consistent with growth and separation" if grows and separated == trials else "not consistent with growth and separation",
        "growth": [str(x) for x in growth],
        "separated_pairs": f"{separated}/{trials}",
        "fixed_component": fixed,
    }
    # sandwich or bigness
    if W.kind == "V":
        rows = [sandwich_check(W, m) for m in range(1, M + 1)]
        okC = all(row["lower"] and row["upper"] is not False for row in rows)
        report["sandwich"] = {"pass": okC, "mechanism": "sandwich", "levels": rows}
    elif W.kind == "complete":
        big = W.carrier.divisor.is_big()
        report["sandwich"] = {"pass": big, "mechanism": "complete series of a big divisor" if big else "divisor not big"}
    else:
        report["sandwich"] = {"pass": None, "mechanism": "not applicable"}
    return report
