"""Finite-dimensional spaces of sections stored as reduced bases."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact_geometry import nullspace, rank_and_reduce
from .poly import MultiPoly, span_columns


@dataclass(frozen=True)
class Carrier:
    """Where a space of sections lives.

    ``divisor`` is the level-one class (rational coefficients allowed),
    ``chart`` the ordered maximal cone whose coordinates are used, and
    ``stratum`` the number of flag steps already cut down (0 means X itself,
    in which case polynomials are in chart coordinates; r > 0 means the
    polynomials live on Y_r in the flag's coordinates y_{r+1}, ..., y_d).
    """

    divisor: object
    chart: tuple
    stratum: int = 0
    flag: object = None
    label: str = ""

    @property
    def nvars(self) -> int:
        return len(self.chart) - self.stratum

    def describe(self) -> dict:
        out = {
            "divisor": [str(c) for c in self.divisor.coeffs],
            "chart": list(self.chart),
            "stratum": self.stratum,
        }
        if self.flag is not None:
            out["flag"] = self.flag.describe()
        if self.label:
            out["label"] = self.label
        return out


class GradedSubspace:
    """The level-``m`` piece of a graded series, as a reduced row-echelon basis.

    Columns are monomials sorted lexicographically, so the leading exponent of
    each basis element is its lexicographically smallest one and the leading
    exponents are pairwise distinct.
    """

    __slots__ = ("level", "nvars", "basis", "carrier")

    def __init__(self, level: int, nvars: int, basis: Sequence[MultiPoly], carrier: Carrier | None = None, reduced: bool = False):
        self.level = level
        self.nvars = nvars
        self.carrier = carrier
        if reduced:
            self.basis = tuple(p.with_level(level) for p in basis)
        else:
            self.basis = tuple(p.with_level(level) for p in reduce_polys(basis, nvars))

    @classmethod
    def zero(cls, level: int, nvars: int, carrier: Carrier | None = None) -> "GradedSubspace":
        return cls(level, nvars, (), carrier, reduced=True)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def is_zero(self) -> bool:
        return not self.basis

    def leading_exponents(self) -> list:
        return [p.lex_min_exponent() for p in self.basis]

    def contains(self, poly: MultiPoly) -> bool:
        if poly.is_zero():
            return True
        return len(reduce_polys(list(self.basis) + [poly], self.nvars)) == self.dim

    def contains_space(self, other: "GradedSubspace") -> bool:
        if other.is_zero():
            return True
        return len(reduce_polys(list(self.basis) + list(other.basis), self.nvars)) == self.dim

    def same_space(self, other: "GradedSubspace") -> bool:
        return self.nvars == other.nvars and self.dim == other.dim and self.contains_space(other)

    def sum(self, other: "GradedSubspace") -> "GradedSubspace":
        return GradedSubspace(self.level, self.nvars, list(self.basis) + list(other.basis), self.carrier)

    def map(self, fn, nvars: int | None = None, carrier: Carrier | None = None) -> "GradedSubspace":
        """Image of the space under a linear map given on polynomials."""
        images = [fn(p) for p in self.basis]
        n = self.nvars if nvars is None else nvars
        return GradedSubspace(self.level, n, images, carrier if carrier is not None else self.carrier)

    def with_carrier(self, carrier: Carrier) -> "GradedSubspace":
        return GradedSubspace(self.level, self.nvars, self.basis, carrier, reduced=True)

    def filter_min_degree(self, var: int, bound: int) -> "GradedSubspace":
        """Subspace of elements with ``ord_{y_var} >= bound``, by solving linear conditions."""
        if self.is_zero() or bound <= 0:
            return self
        cols = [e for e in span_columns(self.basis) if e[var] < bound]
        if not cols:
            return self
        rows = [[p.coefficient(e) for p in self.basis] for e in cols]
        kernel = nullspace(rows, self.dim)
        polys = []
        for vec in kernel:
            acc = MultiPoly.zero(self.nvars)
            for c, p in zip(vec, self.basis):
                if c:
                    acc = acc + p.scale(c)
            polys.append(acc)
        return GradedSubspace(self.level, self.nvars, polys, self.carrier)

    def random_element(self, rng, height: int = 100) -> MultiPoly:
        acc = MultiPoly.zero(self.nvars, self.level)
        for p in self.basis:
            c = Fraction(rng.randint(-height, height), rng.randint(1, height))
            acc = acc + p.scale(c)
        return acc.with_level(self.level)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "dim": self.dim,
            "leading_exponents": [list(e) for e in self.leading_exponents()],
        }

    def __repr__(self) -> str:
        return f"GradedSubspace(level={self.level}, dim={self.dim}, nvars={self.nvars})"


def reduce_polys(polys: Iterable[MultiPoly], nvars: int) -> list[MultiPoly]:
    """Reduced row-echelon basis of the span, columns in lexicographic order."""
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        return []
    cols = span_columns(polys)
    if len(polys) == 1:
        p = polys[0]
        return [p.scale(1 / p.terms[min(p.terms)])]
    if all(len(p.terms) == 1 for p in polys):
        seen = {}
        for p in polys:
            (e,) = p.terms
            seen[e] = MultiPoly({e: 1}, nvars)
        return [seen[e] for e in sorted(seen)]
    rows = [[p.coefficient(e) for e in cols] for p in polys]
    _, basis = rank_and_reduce(rows, len(cols))
    out = []
    for row in basis:
        out.append(MultiPoly({e: c for e, c in zip(cols, row) if c}, nvars))
    return out
