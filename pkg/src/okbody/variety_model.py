"""Smooth complete toric varieties, divisors, sections and admissible flags.

Projective space is treated as the toric variety with rays ``e_1, ..., e_d``
and ``-(e_1 + ... + e_d)``; the hyperplane class is the last torus-invariant
divisor.  Sections of ``mD`` are written in the local coordinates of a chart
(an ordered maximal cone ``sigma``): the character ``u`` becomes the monomial
with exponents ``e_k = <u, v_{sigma_k}> + m a_{sigma_k}``.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exact_geometry import (
    Polytope,
    det,
    dot,
    int_det,
    polytope_from_halfspaces,
    q,
    rvec,
    solve,
)
from .poly import MultiPoly
from .spaces import Carrier, GradedSubspace

COEFF_HEIGHT = 100
MAX_FLAG_RETRIES = 10


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# fans
# ---------------------------------------------------------------------------


class VarietyModel:
    """A smooth complete toric variety of dimension 1, 2 or 3."""

    def __init__(self, rays: Sequence[Sequence[int]], cones: Sequence[Sequence[int]], name: str = "", kind: str = "toric"):
        self.rays = tuple(tuple(int(c) for c in r) for r in rays)
        if not self.rays:
            raise ModelError("a fan needs at least one ray")
        self.d = len(self.rays[0])
        if not 1 <= self.d <= 3:
            raise ModelError(f"dimension {self.d} is outside 1..3")
        if any(len(r) != self.d for r in self.rays):
            raise ModelError("rays have inconsistent lengths")
        self.cones = tuple(sorted(tuple(sorted(int(i) for i in c)) for c in cones))
        self.name = name or f"toric{self.d}"
        self.kind = kind
        self._validate()
        faces = set()
        for c in self.cones:
            for k in range(self.d + 1):
                faces.update(itertools.combinations(c, k))
        self._faces = frozenset(faces)

    def _validate(self) -> None:
        for r in self.rays:
            if math.gcd(*r) != 1:
                raise ModelError(f"ray {r} is not primitive")
        if len(set(self.rays)) != len(self.rays):
            raise ModelError("repeated ray")
        for c in self.cones:
            if len(c) != self.d or len(set(c)) != self.d:
                raise ModelError(f"cone {c} is not a maximal simplicial cone")
            if any(i < 0 or i >= len(self.rays) for i in c):
                raise ModelError(f"cone {c} refers to a missing ray")
            if abs(int_det([self.rays[i] for i in c])) != 1:
                raise ModelError(f"cone {c} is not smooth")
        walls: dict = {}
        for c in self.cones:
            for w in itertools.combinations(c, self.d - 1):
                walls[w] = walls.get(w, 0) + 1
        bad = [w for w, k in walls.items() if k != 2]
        if bad:
            raise ModelError(f"fan is not complete: wall {bad[0]} lies in {walls[bad[0]]} cone(s)")
        used = {i for c in self.cones for i in c}
        if len(used) != len(self.rays):
            raise ModelError("some ray lies in no maximal cone")
        rng = random.Random(20240611)
        for _ in range(12):
            probe = [rng.randint(-997, 997) * 7 + 3 for _ in range(self.d)]
            hits = sum(1 for c in self.cones if self._strictly_inside(probe, c))
            if hits != 1:
                raise ModelError(f"fan cones overlap or leave gaps near {probe}")

    def _strictly_inside(self, vec, cone) -> bool:
        coeffs = solve([[self.rays[i][k] for i in cone] for k in range(self.d)], vec)
        return coeffs is not None and all(c > 0 for c in coeffs)

    # faces ------------------------------------------------------------------

    @property
    def nrays(self) -> int:
        return len(self.rays)

    def is_cone(self, indices: Sequence[int]) -> bool:
        return tuple(sorted(set(indices))) in self._faces

    def cones_of_dim(self, k: int) -> list:
        return sorted(f for f in self._faces if len(f) == k)

    def maximal_cone_containing(self, indices: Sequence[int]) -> tuple:
        s = set(indices)
        for c in self.cones:
            if s <= set(c):
                return c
        raise ModelError(f"{sorted(s)} is not a cone of the fan")

    def dual_basis(self, chart: Sequence[int]) -> tuple:
        """Integer vectors ``w_k`` with ``<w_k, v_{chart_j}> = delta_kj``."""
        return _dual_basis(self.rays, tuple(chart))

    def cone_of_vector(self, vec: Sequence) -> tuple:
        """Smallest cone containing ``vec`` in its relative interior, with coefficients."""
        vec = rvec(vec)
        if all(c == 0 for c in vec):
            return (), ()
        for c in self.cones:
            coeffs = solve([[self.rays[i][k] for i in c] for k in range(self.d)], vec)
            if coeffs is not None and all(x >= 0 for x in coeffs):
                pairs = [(i, x) for i, x in zip(c, coeffs) if x > 0]
                return tuple(i for i, _ in pairs), tuple(x for _, x in pairs)
        raise ModelError(f"vector {vec} lies in no cone")

    def describe(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "dim": self.d,
            "rays": [list(r) for r in self.rays],
            "cones": [list(c) for c in self.cones],
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, VarietyModel) and self.rays == other.rays and self.cones == other.cones

    def __hash__(self) -> int:
        return hash((self.rays, self.cones))

    def __repr__(self) -> str:
        return f"VarietyModel({self.name!r}, d={self.d}, rays={len(self.rays)})"

    # divisors ---------------------------------------------------------------

    def divisor(self, coeffs: Sequence) -> "DivisorClass":
        return DivisorClass(self, coeffs)

    def prime(self, j: int) -> "DivisorClass":
        return DivisorClass(self, [int(i == j) for i in range(self.nrays)])

    def zero_divisor(self) -> "DivisorClass":
        return DivisorClass(self, [0] * self.nrays)

    def hyperplane(self, k=1) -> "DivisorClass":
        if self.kind != "projective_space":
            raise ModelError("O(k) notation needs a projective space")
        return DivisorClass(self, [0] * (self.nrays - 1) + [k])

    def O(self, *degrees) -> "DivisorClass":
        """``O(k)`` on projective space, ``O(a, b)`` on P^1 x P^1."""
        if self.kind == "projective_space" and len(degrees) == 1:
            return self.hyperplane(degrees[0])
        if self.kind == "p1xp1" and len(degrees) == 2:
            a, b = degrees
            return DivisorClass(self, [0, 0, a, b])
        raise ModelError(f"O{tuple(degrees)} is not defined on {self.name}")

    def reference_ample(self) -> "DivisorClass":
        """Smallest-coefficient ample class found by a bounded search."""
        if self.kind == "projective_space":
            return self.hyperplane(1)
        for total in range(1, 3 * self.nrays + 1):
            for combo in _compositions(total, self.nrays, 3):
                D = DivisorClass(self, combo)
                if D.is_ample():
                    return D
        raise ModelError(f"no ample class with small coefficients on {self.name}")

    def curve_classes(self) -> list:
        """Torus-invariant curves as (d-1)-cones."""
        return self.cones_of_dim(self.d - 1)


@lru_cache(maxsize=None)
def _dual_basis(rays: tuple, chart: tuple) -> tuple:
    d = len(chart)
    mat = [[Fraction(rays[chart[j]][k]) for k in range(d)] for j in range(d)]
    out = []
    for kk in range(d):
        rhs = [Fraction(int(j == kk)) for j in range(d)]
        w = solve(mat, rhs)
        out.append(tuple(int(c) for c in w))
    return tuple(out)


def _compositions(total: int, parts: int, cap: int):
    if parts == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap), -1, -1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


def projective_space(d: int) -> VarietyModel:
    rays = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    rays.append(tuple(-1 for _ in range(d)))
    cones = list(itertools.combinations(range(d + 1), d))
    return VarietyModel(rays, cones, name=f"P{d}", kind="projective_space")


def p1xp1() -> VarietyModel:
    rays = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    cones = [(0, 1), (1, 2), (2, 3), (0, 3)]
    return VarietyModel(rays, cones, name="P1xP1", kind="p1xp1")


def hirzebruch(e: int) -> VarietyModel:
    """F_e with rays (1,0), (0,1), (-1,e), (0,-1).

    D_1 is the negative section C0 (C0^2 = -e), D_0 and D_2 are fibres, and
    D_3 is linearly equivalent to C0 + e f.
    """
    if e < 0:
        raise ModelError("Hirzebruch index must be nonnegative")
    rays = [(1, 0), (0, 1), (-1, e), (0, -1)]
    cones = [(0, 1), (1, 2), (2, 3), (0, 3)]
    return VarietyModel(rays, cones, name=f"F{e}", kind="hirzebruch")


def toric(rays, cones, name: str = "") -> VarietyModel:
    return VarietyModel(rays, cones, name=name or "toric", kind="toric")


# ---------------------------------------------------------------------------
# divisors
# ---------------------------------------------------------------------------


class DivisorClass:
    """A torus-invariant Q-divisor ``sum a_j D_j`` on a toric model."""

    __slots__ = ("model", "coeffs")

    def __init__(self, model: VarietyModel, coeffs: Sequence):
        if len(coeffs) != model.nrays:
            raise ModelError(f"expected {model.nrays} coefficients, got {len(coeffs)}")
        self.model = model
        self.coeffs = tuple(q(c) for c in coeffs)

    def _same(self, other: "DivisorClass") -> None:
        if other.model != self.model:
            raise ModelError("divisors live on different models")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._same(other)
        return DivisorClass(self.model, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        self._same(other)
        return DivisorClass(self.model, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __mul__(self, c) -> "DivisorClass":
        c = q(c)
        return DivisorClass(self.model, [c * a for a in self.coeffs])

    __rmul__ = __mul__

    def __neg__(self) -> "DivisorClass":
        return self * -1

    def __eq__(self, other) -> bool:
        return isinstance(other, DivisorClass) and self.model == other.model and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.model, self.coeffs))

    def __repr__(self) -> str:
        terms = [f"{c}*D{j}" for j, c in enumerate(self.coeffs) if c]
        return "DivisorClass(" + (" + ".join(terms) or "0") + f" on {self.model.name})"

    @property
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def denominator(self) -> int:
        out = 1
        for c in self.coeffs:
            out = math.lcm(out, c.denominator)
        return out

    def integral_at(self, m: int) -> bool:
        return all((m * c).denominator == 1 for c in self.coeffs)

    def translate(self, u: Sequence[int]) -> "DivisorClass":
        """``D + div(chi^u)``: a linearly equivalent divisor."""
        return DivisorClass(
            self.model, [a + dot(u, v) for a, v in zip(self.coeffs, self.model.rays)]
        )

    def degree(self) -> Fraction:
        if self.model.kind != "projective_space":
            raise ModelError("degree is only defined on projective space")
        return sum(self.coeffs)

    # polytope -----------------------------------------------------------------

    def polytope(self) -> Polytope:
        return _divisor_polytope(self.model, self.coeffs)

    def is_big(self) -> bool:
        P = self.polytope()
        return not P.is_empty and P.is_full_dimensional

    def is_effective_class(self) -> bool:
        return not self.polytope().is_empty

    def curve_degrees(self) -> dict:
        """``D . V(tau)`` for every torus-invariant curve ``V(tau)``."""
        return {tau: intersection_with_stratum(tau, [self]) for tau in self.model.curve_classes()}

    def is_nef(self) -> bool:
        return all(v >= 0 for v in self.curve_degrees().values())

    def is_ample(self) -> bool:
        return all(v > 0 for v in self.curve_degrees().values())

    def linearly_equivalent(self, other: "DivisorClass") -> bool:
        """Exact test: the difference is ``div(chi^u)`` for an integral ``u``."""
        self._same(other)
        diff = [a - b for a, b in zip(self.coeffs, other.coeffs)]
        chart = self.model.cones[0]
        w = self.model.dual_basis(chart)
        u = [sum(diff[chart[k]] * w[k][i] for k in range(self.model.d)) for i in range(self.model.d)]
        if any(Fraction(c).denominator != 1 for c in u):
            return False
        return all(dot(u, v) == a for v, a in zip(self.model.rays, diff))

    numerically_equivalent = linearly_equivalent

    def chart_offsets(self, chart: Sequence[int]) -> tuple:
        return tuple(self.coeffs[j] for j in chart)

    def to_json(self) -> list:
        return [str(c) for c in self.coeffs]


@lru_cache(maxsize=None)
def _divisor_polytope(model: VarietyModel, coeffs: tuple) -> Polytope:
    hs = [(tuple(-c for c in v), a) for v, a in zip(model.rays, coeffs)]
    return polytope_from_halfspaces(hs, model.d)


def lattice_points_of_multiple(D: DivisorClass, m: int) -> list:
    """Lattice points of ``m P_D``; empty when ``mD`` is not integral."""
    if not D.integral_at(m):
        return []
    return _lattice_points(D.model, D.coeffs, m)


@lru_cache(maxsize=4096)
def _lattice_points(model: VarietyModel, coeffs: tuple, m: int) -> list:
    P = _divisor_polytope(model, coeffs)
    if P.is_empty:
        return []
    box = [(math.ceil(m * lo), math.floor(m * hi)) for lo, hi in P.bounding_box()]
    bounds = [(tuple(v), m * a) for v, a in zip(model.rays, coeffs)]
    out = []
    for u in itertools.product(*[range(lo, hi + 1) for lo, hi in box]):
        if all(dot(u, v) + b >= 0 for v, b in bounds):
            out.append(u)
    return out


def chart_exponent(D: DivisorClass, m: int, chart: Sequence[int], u: Sequence[int]) -> tuple:
    rays = D.model.rays
    return tuple(int(dot(u, rays[j]) + m * D.coeffs[j]) for j in chart)


def character_of_exponent(D: DivisorClass, m: int, chart: Sequence[int], e: Sequence) -> tuple:
    """Inverse of :func:`chart_exponent`."""
    w = D.model.dual_basis(chart)
    d = D.model.d
    shifted = [q(e[k]) - m * D.coeffs[chart[k]] for k in range(d)]
    return tuple(sum(shifted[k] * w[k][i] for k in range(d)) for i in range(d))


def sections(D: DivisorClass, m: int, chart: Sequence[int] | None = None, flag: "Flag | None" = None) -> GradedSubspace:
    """Monomial basis of ``H^0(X, mD)`` in the coordinates of ``chart``."""
    if m < 0:
        raise ModelError("level must be nonnegative")
    if chart is None:
        chart = flag.chart if flag is not None else D.model.cones[0]
    chart = tuple(chart)
    carrier = Carrier(D, chart, 0, flag)
    monos = sorted(chart_exponent(D, m, chart, u) for u in lattice_points_of_multiple(D, m))
    basis = [MultiPoly({e: 1}, D.model.d) for e in monos]
    return GradedSubspace(m, D.model.d, basis, carrier, reduced=True)


def section_dimension(D: DivisorClass, m: int) -> int:
    return len(lattice_points_of_multiple(D, m))


# ---------------------------------------------------------------------------
# intersection theory
# ---------------------------------------------------------------------------


def intersection_number(*divisors: DivisorClass) -> Fraction:
    """``D_1 . ... . D_d`` by multilinear expansion over the fan."""
    if not divisors:
        raise ModelError("need at least one divisor")
    model = divisors[0].model
    for D in divisors[1:]:
        if D.model != model:
            raise ModelError("divisors live on different models")
    if len(divisors) != model.d:
        raise ModelError(f"need exactly {model.d} divisors, got {len(divisors)}")
    return intersection_with_stratum((), divisors)


def intersection_with_stratum(tau: Sequence[int], divisors: Sequence[DivisorClass]) -> Fraction:
    """``V(tau) . D_1 ... D_k`` with ``k = d - dim tau``."""
    model = divisors[0].model if divisors else None
    if model is None:
        raise ModelError("need at least one divisor")
    if len(tau) + len(divisors) != model.d:
        raise ModelError("dimension mismatch in stratum intersection")
    total = Fraction(0)
    supports = [[(j, c) for j, c in enumerate(D.coeffs) if c] for D in divisors]
    for choice in itertools.product(*supports):
        coeff = Fraction(1)
        for _, c in choice:
            coeff *= c
        idx = tuple(sorted(list(tau) + [j for j, _ in choice]))
        total += coeff * _monomial_intersection(model, idx)
    return total


@lru_cache(maxsize=None)
def _monomial_intersection(model: VarietyModel, idx: tuple) -> Fraction:
    distinct = sorted(set(idx))
    if not model.is_cone(distinct):
        return Fraction(0)
    if len(distinct) == len(idx):
        return Fraction(1)
    counts = {j: idx.count(j) for j in distinct}
    j = next(k for k in distinct if counts[k] > 1)
    sigma = model.maximal_cone_containing(distinct)
    w = model.dual_basis(sigma)[sigma.index(j)]
    rest = list(idx)
    rest.remove(j)
    total = Fraction(0)
    for i, v in enumerate(model.rays):
        if i in sigma:
            continue
        c = dot(w, v)
        if c:
            total -= c * _monomial_intersection(model, tuple(sorted(rest + [i])))
    return total


def curve_class_pairing(flag: "Flag", D: DivisorClass) -> Fraction:
    """``Y_{d-1} . D`` for the flag's curve."""
    return flag.curve_pairing(D)


# ---------------------------------------------------------------------------
# flags
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Flag:
    """An admissible flag ``X = Y_0 > Y_1 > ... > Y_d`` given by local equations.

    In flag coordinates ``y = L (x - p)`` on the chart, ``Y_r`` is cut out by
    ``y_1 = ... = y_r = 0``.  Torus-invariant flags have ``L`` the identity and
    ``p = 0`` with the chart ordered along the flag, so ``Y_r`` is the orbit
    closure of the cone spanned by the first ``r`` rays.
    """

    model: VarietyModel
    kind: str
    chart: tuple
    matrix: tuple = ()
    point: tuple = ()
    seed: int | None = None
    attempts: int = 1

    @classmethod
    def torus(cls, model: VarietyModel, order: Sequence[int]) -> "Flag":
        order = tuple(int(i) for i in order)
        if len(order) != model.d or not model.is_cone(order):
            raise ModelError(f"flag order {order} is not a maximal cone")
        ident = tuple(tuple(Fraction(int(i == j)) for j in range(model.d)) for i in range(model.d))
        return cls(model, "torus", order, ident, tuple(Fraction(0) for _ in range(model.d)))

    @classmethod
    def generic(cls, model: VarietyModel, seed: int, chart: Sequence[int] | None = None) -> "Flag":
        """Seeded linear flag in a chart; rationals of height at most 100."""
        chart = tuple(sorted(chart)) if chart is not None else model.cones[0]
        if chart not in model.cones:
            raise ModelError(f"{chart} is not a maximal cone")
        rng = random.Random(seed)
        d = model.d
        for attempt in range(1, MAX_FLAG_RETRIES + 1):
            L = tuple(tuple(_rand_q(rng) for _ in range(d)) for _ in range(d))
            p = tuple(_rand_q(rng) for _ in range(d))
            flag = cls(model, "generic", chart, L, p, seed, attempt)
            if flag.admissibility_problems() == []:
                return flag
        raise ModelError(f"no admissible generic flag after {MAX_FLAG_RETRIES} draws (seed {seed})")

    # coordinates --------------------------------------------------------------

    @property
    def d(self) -> int:
        return self.model.d

    def inverse_matrix(self) -> tuple:
        return _inverse(self.matrix)

    def admissibility_problems(self) -> list:
        """Checks that every member is a smooth irreducible linear section at ``Y_d``."""
        out = []
        if det(self.matrix) == 0:
            out.append("flag matrix is singular")
            return out
        if self.kind == "generic":
            for r in range(1, self.d + 1):
                if _rank(self.matrix[:r]) != r:
                    out.append(f"Y_{r} has the wrong codimension")
            if any(c == 0 for row in self.matrix for c in row):
                out.append("a flag equation misses a coordinate")
            if any(c == 0 for c in self.point):
                out.append("Y_d lies on a torus-invariant divisor")
            Linv = self.inverse_matrix()
            if any(Linv[i][self.d - 1] == 0 for i in range(self.d)):
                out.append("Y_{d-1} is parallel to a coordinate hyperplane")
        return out

    def to_flag_coords(self, poly: MultiPoly) -> MultiPoly:
        """Rewrite a chart polynomial in the flag coordinates ``y``."""
        if self.kind == "torus":
            return poly
        return poly.compose_affine(self.inverse_matrix(), self.point)

    def to_chart_coords(self, poly: MultiPoly) -> MultiPoly:
        if self.kind == "torus":
            return poly
        shift = [-sum(self.matrix[i][j] * self.point[j] for j in range(self.d)) for i in range(self.d)]
        return poly.compose_affine(self.matrix, shift)

    def local_equation(self, r: int) -> MultiPoly:
        """Chart equation of the hypersurface ``A_r`` (1-based)."""
        row = self.matrix[r - 1]
        const = -sum(c * x for c, x in zip(row, self.point))
        terms = {(0,) * self.d: const}
        for k, c in enumerate(row):
            e = [0] * self.d
            e[k] = 1
            terms[tuple(e)] = c
        return MultiPoly(terms, self.d)

    # classes ------------------------------------------------------------------

    def chart_simplex_class(self) -> DivisorClass:
        """Class of the closure of a general affine hyperplane of the chart."""
        w = self.model.dual_basis(self.chart)
        coeffs = []
        for v in self.model.rays:
            coeffs.append(max(0, -min(min(dot(wk, v) for wk in w), 0)))
        return DivisorClass(self.model, coeffs)

    def hyperplane_class(self, r: int) -> DivisorClass:
        """Class of ``A_r`` with ``Y_r = A_1 n ... n A_r``."""
        if self.kind == "torus":
            return self.model.prime(self.chart[r - 1])
        return self.chart_simplex_class()

    def stratum_cone(self, r: int) -> tuple:
        if self.kind != "torus":
            raise ModelError("only torus-invariant flags have stratum cones")
        return tuple(self.chart[:r])

    def stratum_intersection(self, r: int, D: DivisorClass) -> Fraction:
        """``Y_r . D^{d-r}``."""
        if self.kind == "torus":
            return intersection_with_stratum(self.stratum_cone(r), [D] * (self.d - r))
        if r == self.d - 1:
            return self.curve_pairing(D)
        A = self.chart_simplex_class()
        return intersection_number(*([A] * r + [D] * (self.d - r)))

    def curve_direction(self) -> tuple:
        """Chart direction of the line ``Y_{d-1}`` (parameter ``t = y_d``)."""
        Linv = self.inverse_matrix()
        return tuple(Linv[i][self.d - 1] for i in range(self.d))

    def curve_meets(self) -> dict:
        """Intersection points of ``Y_{d-1}`` with each torus-invariant prime.

        Maps ray index to a list of ``(place, multiplicity)`` where ``place`` is
        a rational value of ``t = y_d`` or the string ``"inf"``.  Invariant
        flag curves contained in a prime report ``"contained"``.
        """
        out: dict = {j: [] for j in range(self.model.nrays)}
        if self.kind == "torus":
            tau = self.stratum_cone(self.d - 1)
            for j in range(self.model.nrays):
                if j in tau:
                    out[j] = [("contained", 0)]
                elif self.model.is_cone(tau + (j,)):
                    place = Fraction(0) if j == self.chart[-1] else "inf"
                    out[j] = [(place, 1)]
            return out
        c = self.curve_direction()
        lam = [Fraction(0)] * self.d
        for k, ck in enumerate(c):
            if ck != 0:
                out[self.chart[k]].append((-self.point[k] / ck, 1))
                ray = self.model.rays[self.chart[k]]
                lam = [a - b for a, b in zip(lam, ray)]
        cone, mults = self.model.cone_of_vector(lam)
        for j, mu in zip(cone, mults):
            out[j].append(("inf", mu))
        return out

    def curve_pairing(self, D: DivisorClass) -> Fraction:
        if D.model != self.model:
            raise ModelError("divisor and flag live on different models")
        if self.kind == "torus":
            return intersection_with_stratum(self.stratum_cone(self.d - 1), [D])
        total = Fraction(0)
        for j, pts in self.curve_meets().items():
            for _, mult in pts:
                total += D.coeffs[j] * mult
        return total

    def describe(self) -> dict:
        out = {"kind": self.kind, "chart": list(self.chart)}
        if self.kind == "generic":
            out["seed"] = self.seed
            out["attempts"] = self.attempts
            out["matrix"] = [[str(c) for c in row] for row in self.matrix]
            out["point"] = [str(c) for c in self.point]
        return out

    def label(self) -> str:
        if self.kind == "torus":
            return "torus" + "-".join(str(i) for i in self.chart)
        return f"generic[{','.join(map(str, self.chart))}]#{self.seed}"


def _rand_q(rng: random.Random) -> Fraction:
    while True:
        num = rng.randint(-COEFF_HEIGHT, COEFF_HEIGHT)
        if num:
            return Fraction(num, rng.randint(1, COEFF_HEIGHT))


def _rank(rows) -> int:
    from .exact_geometry import rank_and_reduce

    return rank_and_reduce([list(r) for r in rows])[0]


@lru_cache(maxsize=None)
def _inverse(matrix: tuple) -> tuple:
    n = len(matrix)
    cols = []
    for j in range(n):
        x = solve(matrix, [Fraction(int(i == j)) for i in range(n)])
        if x is None:
            raise ModelError("flag matrix is singular")
        cols.append(x)
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def invariant_flags(model: VarietyModel) -> list:
    out = []
    for c in model.cones:
        for order in itertools.permutations(c):
            out.append(Flag.torus(model, order))
    return out


def restrict_one_step(s: MultiPoly, flag: Flag | None, r: int, t: int, chart_coords: bool = False) -> MultiPoly:
    """Divide by the ``r``-th flag equation to the power ``t`` and restrict to ``Y_r``.

    ``s`` lives on ``Y_{r-1}`` in flag coordinates (its first variable is
    ``y_r``), unless ``chart_coords`` is set, which is only meaningful for
    ``r = 1``.
    """
    if chart_coords:
        if r != 1:
            raise ModelError("chart coordinates only make sense on X itself")
        s = flag.to_flag_coords(s)
    if s.is_zero():
        return s
    if s.min_degree(0) < t:
        raise ModelError(f"section vanishes to order {s.min_degree(0)} < {t} along Y_{r}")
    return s.divide_by_var_power(0, t).restrict_first(1)
