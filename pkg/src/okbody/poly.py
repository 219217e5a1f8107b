"""Exact multivariate polynomials in local chart coordinates.

A :class:`MultiPoly` is a sparse map ``exponent tuple -> Fraction``.  Heavy
lifting (products, affine substitution, gcd, resultants) is delegated to
python-flint's ``fmpq_mpoly``; the dict form is what the rest of the package
inspects.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import flint

from .exact_geometry import q


def _ctx(nvars: int):
    return flint.fmpq_mpoly_ctx.get(("y", max(nvars, 1)), "lex")


def _fq(c: Fraction) -> flint.fmpq:
    return flint.fmpq(c.numerator, c.denominator)


class MultiPoly:
    """Sparse polynomial with rational coefficients.

    ``level`` records the graded piece the polynomial belongs to, when that is
    meaningful; it never affects arithmetic.
    """

    __slots__ = ("terms", "nvars", "level")

    def __init__(self, terms: Mapping, nvars: int, level: int | None = None):
        clean = {}
        for e, c in terms.items():
            c = q(c)
            if c != 0:
                e = tuple(int(k) for k in e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} has wrong length for {nvars} variables")
                if any(k < 0 for k in e):
                    raise ValueError(f"negative exponent {e}")
                clean[e] = c
        self.terms = clean
        self.nvars = nvars
        self.level = level

    # construction -----------------------------------------------------------

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1, level: int | None = None) -> "MultiPoly":
        return cls({tuple(exp): coeff}, len(exp), level)

    @classmethod
    def constant(cls, c, nvars: int, level: int | None = None) -> "MultiPoly":
        return cls({(0,) * nvars: c}, nvars, level)

    @classmethod
    def zero(cls, nvars: int, level: int | None = None) -> "MultiPoly":
        return cls({}, nvars, level)

    @classmethod
    def variable(cls, i: int, nvars: int) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): 1}, nvars)

    @classmethod
    def from_flint(cls, f, nvars: int, level: int | None = None) -> "MultiPoly":
        terms = {}
        for e, c in f.to_dict().items():
            terms[tuple(e)[:nvars] if nvars else ()] = Fraction(int(c.p), int(c.q))
        return cls(terms, nvars, level)

    def to_flint(self):
        ctx = _ctx(self.nvars)
        if self.nvars == 0:
            return ctx.from_dict({(0,): _fq(c) for c in self.terms.values()}) if self.terms else ctx.from_dict({})
        return ctx.from_dict({e: _fq(c) for e, c in self.terms.items()})

    # basic protocol ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            mono = "*".join(
                f"y{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)

    def exponents(self) -> list:
        return sorted(self.terms)

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, i: int) -> int:
        return max(e[i] for e in self.terms) if self.terms else -1

    def with_level(self, level: int | None) -> "MultiPoly":
        return MultiPoly(self.terms, self.nvars, level)

    # arithmetic ---------------------------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return MultiPoly(out, self.nvars, self.level)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly({e: -c for e, c in self.terms.items()}, self.nvars, self.level)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def scale(self, c) -> "MultiPoly":
        c = q(c)
        return MultiPoly({e: c * v for e, v in self.terms.items()}, self.nvars, self.level)

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ValueError("multiplying polynomials in different numbers of variables")
            lvl = None
            if self.level is not None and other.level is not None:
                lvl = self.level + other.level
            if len(self.terms) * len(other.terms) < 64:
                out: dict = {}
                for e1, c1 in self.terms.items():
                    for e2, c2 in other.terms.items():
                        e = tuple(a + b for a, b in zip(e1, e2))
                        out[e] = out.get(e, Fraction(0)) + c1 * c2
                return MultiPoly(out, self.nvars, lvl)
            return MultiPoly.from_flint(self.to_flint() * other.to_flint(), self.nvars, lvl)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative power")
        res = MultiPoly.from_flint(self.to_flint() ** k, self.nvars)
        res.level = None if self.level is None else self.level * k
        return res

    # valuation primitives -------------------------------------------------------

    def lex_min_exponent(self) -> tuple:
        if not self.terms:
            raise ValueError("the zero polynomial has no initial exponent")
        return min(self.terms)

    def min_degree(self, i: int) -> int:
        """Order of vanishing along the coordinate hyperplane ``y_i = 0``."""
        if not self.terms:
            raise ValueError("order of the zero polynomial is undefined")
        return min(e[i] for e in self.terms)

    def divide_by_var_power(self, i: int, t: int) -> "MultiPoly":
        out = {}
        for e, c in self.terms.items():
            if e[i] < t:
                raise ValueError(f"polynomial is not divisible by y{i + 1}^{t}")
            e2 = list(e)
            e2[i] -= t
            out[tuple(e2)] = c
        return MultiPoly(out, self.nvars, self.level)

    def restrict_first(self, r: int = 1) -> "MultiPoly":
        """Set the first ``r`` variables to zero and drop them."""
        out = {}
        for e, c in self.terms.items():
            if any(e[:r]):
                continue
            out[e[r:]] = c
        return MultiPoly(out, self.nvars - r, self.level)

    def coefficient_of_prefix(self, prefix: Sequence[int]) -> "MultiPoly":
        """Coefficient of ``y_1^{p_1} ... y_r^{p_r}`` as a polynomial in the rest."""
        prefix = tuple(prefix)
        r = len(prefix)
        out = {e[r:]: c for e, c in self.terms.items() if e[:r] == prefix}
        return MultiPoly(out, self.nvars - r, self.level)

    def permute(self, order: Sequence[int]) -> "MultiPoly":
        """New variable k is old variable ``order[k]``."""
        return MultiPoly(
            {tuple(e[j] for j in order): c for e, c in self.terms.items()}, self.nvars, self.level
        )

    def embed(self, nvars: int, positions: Sequence[int]) -> "MultiPoly":
        out = {}
        for e, c in self.terms.items():
            full = [0] * nvars
            for p, k in zip(positions, e):
                full[p] = k
            out[tuple(full)] = c
        return MultiPoly(out, nvars, self.level)

    # substitution -----------------------------------------------------------

    def compose(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute ``y_i -> images[i]``; all images share one variable count."""
        if len(images) != self.nvars:
            raise ValueError("compose needs one image per variable")
        target = images[0].nvars if images else 0
        if self.nvars == 0:
            c = self.terms.get((), Fraction(0))
            return MultiPoly.constant(c, target, self.level)
        ctx = _ctx(target)
        f = self.to_flint()
        if target == 0:
            vals = [img.terms.get((), Fraction(0)) for img in images]
            return MultiPoly.constant(self.evaluate(vals), 0, self.level)
        res = f.compose(*[g.to_flint() for g in images], ctx=ctx)
        return MultiPoly.from_flint(res, target, self.level)

    def compose_affine(self, matrix: Sequence[Sequence], shift: Sequence) -> "MultiPoly":
        """Substitute ``x = matrix . y + shift``."""
        n = self.nvars
        images = []
        for i in range(n):
            terms = {}
            for j in range(n):
                c = q(matrix[i][j])
                if c:
                    e = [0] * n
                    e[j] = 1
                    terms[tuple(e)] = c
            terms[(0,) * n] = q(shift[i])
            images.append(MultiPoly(terms, n))
        return self.compose(images)

    def shift(self, point: Sequence) -> "MultiPoly":
        """``s(point + y)``: Taylor expansion around ``point``."""
        n = self.nvars
        ident = [[int(i == j) for j in range(n)] for i in range(n)]
        return self.compose_affine(ident, point)

    def evaluate(self, point: Sequence) -> Fraction:
        pt = [q(c) for c in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(pt, e):
                if k:
                    v *= x ** k
            total += v
        return total

    def substitute(self, i: int, value) -> "MultiPoly":
        """Set variable ``i`` to a rational value and drop it."""
        value = q(value)
        out: dict = {}
        for e, c in self.terms.items():
            e2 = e[:i] + e[i + 1:]
            out[e2] = out.get(e2, Fraction(0)) + c * value ** e[i]
        return MultiPoly(out, self.nvars - 1, self.level)

    def homogenize(self, degree: int) -> "MultiPoly":
        """Homogeneous form of the given degree with the new variable first."""
        out = {}
        for e, c in self.terms.items():
            k = degree - sum(e)
            if k < 0:
                raise ValueError(f"term of degree {sum(e)} exceeds {degree}")
            out[(k,) + e] = c
        return MultiPoly(out, self.nvars + 1, self.level)

    # gcd / univariate -----------------------------------------------------------

    def gcd(self, other: "MultiPoly") -> "MultiPoly":
        if self.is_zero():
            return other.monic()
        if other.is_zero():
            return self.monic()
        return MultiPoly.from_flint(self.to_flint().gcd(other.to_flint()), self.nvars).monic()

    def exact_divide(self, other: "MultiPoly") -> "MultiPoly":
        quo, rem = divmod(self.to_flint(), other.to_flint())
        if not rem.is_zero():
            raise ValueError("division is not exact")
        return MultiPoly.from_flint(quo, self.nvars, self.level)

    def monic(self) -> "MultiPoly":
        """Scale so that the lexicographically largest term has coefficient 1."""
        if not self.terms:
            return self
        lead = self.terms[max(self.terms)]
        return self.scale(1 / lead)

    def resultant(self, other: "MultiPoly", var: int) -> "MultiPoly":
        res = self.to_flint().resultant(other.to_flint(), var)
        return MultiPoly.from_flint(res, self.nvars)

    def factor(self) -> list:
        """Irreducible factors over Q with multiplicities (content dropped)."""
        if self.total_degree() <= 0:
            return []
        _, facs = self.to_flint().factor()
        return [(MultiPoly.from_flint(f, self.nvars).monic(), int(k)) for f, k in facs]

    def to_univariate(self) -> flint.fmpq_poly:
        if self.nvars != 1:
            raise ValueError("not a univariate polynomial")
        deg = self.total_degree()
        coeffs = [self.terms.get((k,), Fraction(0)) for k in range(max(deg, 0) + 1)]
        return flint.fmpq_poly([_fq(c) for c in coeffs])

    @classmethod
    def from_univariate(cls, f: flint.fmpq_poly) -> "MultiPoly":
        out = {}
        for k in range(f.degree() + 1):
            c = f[k]
            out[(k,)] = Fraction(int(c.p), int(c.q))
        return cls(out, 1)

    def to_json(self) -> dict:
        return {str(list(e)): str(c) for e, c in sorted(self.terms.items())}


def span_columns(polys: Iterable[MultiPoly]) -> list:
    cols = set()
    for p in polys:
        cols.update(p.terms)
    return sorted(cols)


def affine_form(coeffs: Sequence, constant, nvars: int) -> MultiPoly:
    terms = {(0,) * nvars: q(constant)}
    for i, c in enumerate(coeffs):
        e = [0] * nvars
        e[i] = 1
        terms[tuple(e)] = q(c)
    return MultiPoly(terms, nvars)
