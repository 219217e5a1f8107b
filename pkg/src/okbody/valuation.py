"""Flag valuations, value sets and orders of vanishing."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .exact_geometry import dot, q
from .poly import MultiPoly
from .spaces import Carrier, GradedSubspace, reduce_polys
from .variety_model import Flag, ModelError, character_of_exponent

# A value vector is a plain tuple of nonnegative integers; the level travels
# alongside it wherever it matters (graded semigroups store (nu, m) pairs).
ValueVector = tuple


class ValuationError(ValueError):
    pass


def in_flag_coords(flag: Flag, poly: MultiPoly, stratum: int = 0) -> MultiPoly:
    """Polynomials on X come in chart coordinates; on ``Y_r`` (r > 0) they already use flag ones."""
    if stratum == 0:
        return flag.to_flag_coords(poly)
    return poly


def valuate(flag: Flag, s: MultiPoly, stratum: int = 0) -> ValueVector:
    """Iterated order / divide / restrict along the flag.

    For a section on ``Y_r`` (``stratum = r``) this is the valuation of the
    induced flag ``Y_r > Y_{r+1} > ... > Y_d``.
    """
    if s.is_zero():
        raise ValuationError("the valuation of the zero section is undefined")
    t = in_flag_coords(flag, s, stratum)
    lead = t.lex_min_exponent()
    out = []
    cur = t
    for _ in range(t.nvars):
        k = cur.min_degree(0)
        out.append(k)
        cur = cur.divide_by_var_power(0, k).restrict_first(1)
    if tuple(out) != lead:
        raise ValuationError(f"iterated valuation {tuple(out)} disagrees with initial exponent {lead}")
    return tuple(out)


def value_set(flag: Flag, W: GradedSubspace) -> list:
    """Image of the valuation on ``W - {0}``, sorted; its size equals ``dim W``."""
    if W.is_zero():
        return []
    stratum = W.carrier.stratum if W.carrier is not None else 0
    if flag.kind == "torus" or stratum > 0:
        polys = W.basis
        red = W.basis
    else:
        polys = [in_flag_coords(flag, p, stratum) for p in W.basis]
        red = reduce_polys(polys, W.nvars)
    values = sorted(p.lex_min_exponent() for p in red)
    if len(set(values)) != W.dim:
        raise ValuationError("value set size differs from the dimension")
    return values


def valuation_echelon(flag: Flag, polys: Sequence[MultiPoly], stratum: int = 0) -> list:
    """Pairwise elimination until all valuations are distinct.

    Slower than the reduced echelon form; kept as an independent route.
    """
    work = [in_flag_coords(flag, p, stratum) for p in polys if not p.is_zero()]
    done: dict = {}
    while work:
        p = work.pop()
        while not p.is_zero():
            v = p.lex_min_exponent()
            if v not in done:
                done[v] = p
                break
            other = done[v]
            p = p - other.scale(p.terms[v] / other.terms[v])
    return sorted(done)


# ---------------------------------------------------------------------------
# prime divisor descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToricPrime:
    """The torus-invariant prime ``D_j`` (restricted to the carrier's stratum)."""

    ray: int

    def label(self) -> str:
        return f"D{self.ray}"


@dataclass(frozen=True)
class CoordinateHyperplane:
    """``{y_k = 0}`` in the carrier's own coordinates (0-based ``k``)."""

    var: int

    def label(self) -> str:
        return f"y{self.var + 1}=0"


@dataclass(frozen=True)
class CurvePoint:
    """A point on a curve carrier: a rational parameter value or ``"inf"``."""

    place: object

    def label(self) -> str:
        return f"t={self.place}"


PrimeDescriptor = Union[ToricPrime, CoordinateHyperplane, CurvePoint]


def _toric_term_order(carrier: Carrier, m: int, e: Sequence[int], j: int) -> Fraction:
    D = carrier.divisor
    model = D.model
    full = (0,) * carrier.stratum + tuple(e)
    U = character_of_exponent(D, m, carrier.chart, full)
    return dot(U, model.rays[j]) + m * D.coeffs[j]


def curve_degree(carrier: Carrier, m: int) -> Fraction:
    """Degree of the level-``m`` bundle on a curve carrier."""
    D = carrier.divisor
    if carrier.stratum == 0 and D.model.d == 1:
        return m * sum(D.coeffs)
    if carrier.flag is None or carrier.stratum != D.model.d - 1:
        raise ModelError("carrier is not a curve")
    return m * carrier.flag.curve_pairing(D)


def ord_poly(E: PrimeDescriptor, s: MultiPoly, carrier: Carrier, m: int) -> Fraction:
    if s.is_zero():
        raise ValuationError("order of the zero section is undefined")
    if isinstance(E, CoordinateHyperplane):
        return Fraction(s.min_degree(E.var))
    if isinstance(E, ToricPrime):
        flag = carrier.flag
        if carrier.stratum > 0:
            if flag is None or flag.kind != "torus":
                raise ModelError("toric primes on a stratum need a torus-invariant flag")
            tau = carrier.chart[: carrier.stratum]
            if E.ray in tau or not carrier.divisor.model.is_cone(tau + (E.ray,)):
                raise ModelError(f"D{E.ray} does not cut a prime divisor on Y_{carrier.stratum}")
        return min(_toric_term_order(carrier, m, e, E.ray) for e in s.terms)
    if isinstance(E, CurvePoint):
        if s.nvars != 1:
            raise ModelError("curve points need a one-variable carrier")
        if E.place == "inf":
            return curve_degree(carrier, m) - s.total_degree()
        t0 = q(E.place)
        shifted = s.shift([t0])
        return Fraction(shifted.min_degree(0))
    raise TypeError(f"unknown prime descriptor {E!r}")


def ord_along(E: PrimeDescriptor, W: GradedSubspace) -> Fraction:
    """``min ord_E(s)`` over ``W``; the minimum over a basis is the minimum over the space."""
    if W.is_zero():
        raise ValuationError("order along a prime is undefined for the zero space")
    return min(ord_poly(E, p, W.carrier, W.level) for p in W.basis)


@dataclass
class AsymptoticOrder:
    value: Fraction
    exact: bool
    stabilized: bool
    method: str
    sequence: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "value": str(self.value),
            "exact": self.exact,
            "stabilized": self.stabilized,
            "method": self.method,
            "sequence": [[m, str(v)] for m, v in self.sequence],
        }


def toric_asymptotic_order(D, j: int) -> Fraction:
    """``ord_{D_j} ||D||`` from the polytope: minimum of ``<u, v_j> + a_j``."""
    P = D.polytope()
    if P.is_empty:
        raise ValuationError("divisor class has no sections")
    v = D.model.rays[j]
    return min(dot(u, v) for u in P.vertices) + D.coeffs[j]


def asymptotic_ord(E: PrimeDescriptor, series, M: int) -> AsymptoticOrder:
    """``lim ord_E(W_m) / m`` estimated from levels ``m <= M``.

    For complete toric series and torus-invariant primes the value is read
    off the polytope and marked exact.  Otherwise the best certified bound is
    the minimum ratio (subadditivity makes the limit an infimum); it is
    flagged as stabilized when the last three nonzero levels attain it.
    """
    seq = []
    for m in range(1, M + 1):
        W = series.level(m)
        if not W.is_zero():
            seq.append((m, ord_along(E, W) / m))
    if not seq:
        raise ValuationError(f"series is zero at all levels up to {M}")
    best = min(v for _, v in seq)
    tail = [v for _, v in seq[-3:]]
    stabilized = len(seq) >= 3 and all(v == best for v in tail)
    if getattr(series, "kind", "") == "complete" and isinstance(E, ToricPrime) and series.carrier.stratum == 0:
        exact_value = toric_asymptotic_order(series.carrier.divisor, E.ray)
        if exact_value > best:
            raise ValuationError("polytope value exceeds an observed ratio")
        return AsymptoticOrder(exact_value, True, stabilized, "polytope", seq)
    return AsymptoticOrder(best, False, stabilized, "min-ratio", seq)
