"""
Exact rational linear algebra and low-dimensional convex geometry.

Everything here works over :class:`fractions.Fraction`; there is no floating
point anywhere.  Hulls are computed for ambient dimension at most 4 by
brute-force facet enumeration over a small, incrementally grown vertex set,
which is plenty for the bodies that show up at desk scale.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint

MAX_DIM = 4

RationalVector = tuple  # tuple of Fraction; kept as a plain tuple for hashing


def q(x) -> Fraction:
    """Coerce ``x`` to an exact rational.  Floats are refused on purpose."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def rvec(coords: Iterable) -> RationalVector:
    return tuple(q(c) for c in coords)


def fmt_q(x) -> str:
    return str(q(x))


def height(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, q(v).denominator)
    return out


def primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for c in vec:
        g = math.gcd(g, int(c))
    if g == 0:
        return tuple(int(c) for c in vec)
    return tuple(int(c) // g for c in vec)


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------


def rref_python(rows: Sequence[Sequence], ncols: int | None = None):
    """Gauss-Jordan over Q in pure Python.

    Pivot column is the leftmost available one; among candidate pivot rows the
    entry of smallest bit height wins.  Returns ``(reduced_rows, pivots)``.
    """
    mat = [[q(c) for c in row] for row in rows]
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    pivots = []
    r = 0
    for c in range(ncols):
        cands = [i for i in range(r, len(mat)) if mat[i][c] != 0]
        if not cands:
            continue
        best = min(cands, key=lambda i: (height(mat[i][c]), i))
        mat[r], mat[best] = mat[best], mat[r]
        piv = mat[r][c]
        mat[r] = [x / piv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return [tuple(row) for row in mat[:r]], pivots


def _fmpq_matrix(rows: Sequence[Sequence], ncols: int) -> flint.fmpq_mat:
    flat = []
    for row in rows:
        for c in row:
            c = q(c)
            flat.append(flint.fmpq(c.numerator, c.denominator))
    return flint.fmpq_mat(len(rows), ncols, flat)


def rank_and_reduce(rows: Sequence[Sequence], ncols: int | None = None):
    """Rank and reduced row-echelon basis of the row space over Q.

    The reduced row-echelon form is unique, so the basis does not depend on
    pivoting choices.  Returns ``(rank, basis)`` with ``basis`` a tuple of
    rational tuples ordered by pivot column.
    """
    rows = list(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows or ncols == 0:
        return 0, ()
    red, rank = _fmpq_matrix(rows, ncols).rref()
    basis = []
    for i in range(rank):
        basis.append(tuple(q(red[i, j]) for j in range(ncols)))
    return rank, tuple(basis)


def pivot_columns(basis: Sequence[Sequence]) -> list[int]:
    out = []
    for row in basis:
        for j, c in enumerate(row):
            if c != 0:
                out.append(j)
                break
    return out


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[RationalVector]:
    """Basis of ``{x : A x = 0}``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    _, basis = rank_and_reduce(rows, ncols)
    piv = pivot_columns(basis)
    free = [j for j in range(ncols) if j not in piv]
    out = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(basis, piv):
            x[p] = -row[f]
        out.append(tuple(x))
    return out


def det(mat: Sequence[Sequence]) -> Fraction:
    n = len(mat)
    if n == 0:
        return Fraction(1)
    return q(_fmpq_matrix(mat, n).det())


def int_det(mat: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant of a small integer matrix."""
    a = [[int(c) for c in row] for row in mat]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def solve(mat: Sequence[Sequence], rhs: Sequence) -> RationalVector | None:
    """Unique solution of a square system, or None when singular."""
    n = len(mat)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(mat)]
    red, piv = rref_python(aug, n + 1)
    if len(piv) < n or piv[:n] != list(range(n)):
        return None
    return tuple(red[i][n] for i in range(n))


def affine_rank(points: Sequence[Sequence]) -> int:
    if len(points) <= 1:
        return 0 if points else -1
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    r, _ = rank_and_reduce(diffs)
    return r


def _int_affine_rank(points) -> int:
    if len(points) <= 1:
        return 0 if points else -1
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    red, _ = rref_python(diffs)
    return len(red)


# ---------------------------------------------------------------------------
# polytopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polytope:
    """A bounded convex polytope with both representations.

    ``halfspaces`` are pairs ``(normal, offset)`` meaning ``normal . x <= offset``
    with ``normal`` a primitive integer vector.  Lower-dimensional polytopes
    carry their affine span as pairs of opposite halfspaces.
    """

    dim: int
    vertices: tuple
    halfspaces: tuple
    affine_dim: int

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    def contains(self, point: Sequence) -> bool:
        if self.is_empty:
            return False
        point = rvec(point)
        return all(dot(n, point) <= b for n, b in self.halfspaces)

    def contains_polytope(self, other: "Polytope") -> bool:
        return all(self.contains(v) for v in other.vertices)

    def equalities(self) -> list:
        hs = set(self.halfspaces)
        return [(n, b) for n, b in self.halfspaces if (tuple(-c for c in n), -b) in hs]

    def in_relative_interior(self, point: Sequence) -> bool:
        if self.is_empty:
            return False
        point = rvec(point)
        eqs = set(self.equalities())
        for n, b in self.halfspaces:
            v = dot(n, point)
            if (n, b) in eqs:
                if v != b:
                    return False
            elif not v < b:
                return False
        return True

    def in_interior(self, point: Sequence) -> bool:
        return self.is_full_dimensional and self.in_relative_interior(point)

    def centroid_of_vertices(self) -> RationalVector:
        k = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / k for i in range(self.dim))

    def bounding_box(self):
        return [
            (min(v[i] for v in self.vertices), max(v[i] for v in self.vertices))
            for i in range(self.dim)
        ]

    def scaled(self, factor) -> "Polytope":
        f = q(factor)
        return convex_hull([tuple(f * c for c in v) for v in self.vertices], dim=self.dim)

    def translated(self, shift: Sequence) -> "Polytope":
        s = rvec(shift)
        return convex_hull([tuple(a + b for a, b in zip(v, s)) for v in self.vertices], dim=self.dim)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "affine_dim": self.affine_dim,
            "vertices": [[fmt_q(c) for c in v] for v in self.vertices],
            "halfspaces": [
                {"normal": list(n), "offset": fmt_q(b)} for n, b in self.halfspaces
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Polytope":
        verts = [rvec(v) for v in data["vertices"]]
        return convex_hull(verts, dim=data["dim"])

    def __repr__(self) -> str:
        vs = ", ".join("(" + ", ".join(fmt_q(c) for c in v) + ")" for v in self.vertices)
        return f"Polytope(dim={self.dim}, affine_dim={self.affine_dim}, vertices=[{vs}])"


def empty_polytope(dim: int) -> Polytope:
    return Polytope(dim=dim, vertices=(), halfspaces=(), affine_dim=-1)


def _normal_through(points: Sequence[Sequence[int]], n: int) -> tuple[int, ...]:
    """Integer normal of the hyperplane through n points of Z^n (zero if degenerate)."""
    base = points[0]
    rows = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    normal = []
    for i in range(n):
        minor = [row[:i] + row[i + 1:] for row in rows]
        normal.append((-1) ** i * int_det(minor))
    return primitive(normal)


def _facets_bruteforce(pts: list, n: int) -> dict:
    facets = {}
    for combo in itertools.combinations(range(len(pts)), n):
        nrm = _normal_through([pts[i] for i in combo], n)
        if not any(nrm):
            continue
        off = dot(nrm, pts[combo[0]])
        if (nrm, off) in facets or (tuple(-c for c in nrm), -off) in facets:
            continue
        vals = [dot(nrm, p) - off for p in pts]
        if all(v <= 0 for v in vals):
            facets[(nrm, off)] = frozenset(i for i, v in enumerate(vals) if v == 0)
        elif all(v >= 0 for v in vals):
            facets[(tuple(-c for c in nrm), -off)] = frozenset(
                i for i, v in enumerate(vals) if v == 0
            )
    return facets


def _prune_to_vertices(pts: list, facets: dict, n: int):
    keep = []
    for i in range(len(pts)):
        normals = [nrm for (nrm, _), tight in facets.items() if i in tight]
        if len(normals) >= n and len(rref_python(normals, n)[0]) == n:
            keep.append(i)
    return keep


def _hull_2d(pts: list):
    pts = sorted(set(pts))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    facets = []
    for a, b in zip(ring, ring[1:] + ring[:1]):
        # counter-clockwise ring: outward normal is (dy, -dx)
        nrm = primitive((b[1] - a[1], a[0] - b[0]))
        facets.append((nrm, dot(nrm, a)))
    return ring, facets


def _hull_full_int(pts: list, n: int):
    """Vertices and facets of the full-dimensional hull of integer points in Z^n."""
    if n == 1:
        lo, hi = min(p[0] for p in pts), max(p[0] for p in pts)
        return [(lo,), (hi,)], [((1,), hi), ((-1,), -lo)]
    if n == 2:
        return _hull_2d(pts)
    pts = sorted(set(pts))
    # initial simplex, greedily
    simplex = [pts[0]]
    for p in pts[1:]:
        if _int_affine_rank(simplex + [p]) == len(simplex):
            simplex.append(p)
            if len(simplex) == n + 1:
                break
    rest = [p for p in pts if p not in simplex]
    centre = [sum(p[i] for p in pts) for i in range(n)]
    k = len(pts)
    rest.sort(key=lambda p: -sum((k * p[i] - centre[i]) ** 2 for i in range(n)))
    verts = list(simplex)
    facets = _facets_bruteforce(verts, n)
    for p in rest:
        if all(dot(nrm, p) <= off for nrm, off in facets):
            continue
        verts.append(p)
        facets = _facets_bruteforce(verts, n)
        keep = _prune_to_vertices(verts, facets, n)
        if len(keep) < len(verts):
            verts = [verts[i] for i in keep]
            facets = _facets_bruteforce(verts, n)
    return verts, list(facets)


def convex_hull(points: Iterable[Sequence], dim: int | None = None) -> Polytope:
    """Convex hull of finitely many rational points of R^n, n <= 4."""
    pts = sorted({rvec(p) for p in points})
    if not pts:
        if dim is None:
            raise ValueError("convex_hull of an empty point set")
        return empty_polytope(dim)
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("points of different dimensions")
    if dim is not None and dim != n:
        raise ValueError(f"points live in R^{n}, expected R^{dim}")
    if n > MAX_DIM:
        raise ValueError(f"ambient dimension {n} exceeds {MAX_DIM}")
    if n == 0:
        return Polytope(0, ((),), (), 0)

    scale = lcm_of_denominators(c for p in pts for c in p)
    ipts = [tuple(int(c * scale) for c in p) for p in pts]
    base = ipts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in ipts[1:]]
    span, piv = rref_python(diffs, n) if diffs else ([], [])
    k = len(span)

    equalities = []
    if k < n:
        for v in nullspace(span, n) if span else nullspace([], n):
            nrm = primitive([c * lcm_of_denominators(v) for c in v])
            off = Fraction(dot(nrm, base), scale)
            equalities += [(nrm, off), (tuple(-c for c in nrm), -off)]
    if k == 0:
        return Polytope(n, (pts[0],), tuple(sorted(equalities)), 0)

    # coordinates on which the projection of the affine span is injective
    coords = piv
    proj = [tuple(p[i] for i in coords) for p in ipts]
    pverts, pfacets = _hull_full_int(proj, k)
    lookup = {}
    for p, full in zip(proj, ipts):
        lookup.setdefault(p, full)
    vertices = sorted(tuple(Fraction(c, scale) for c in lookup[v]) for v in pverts)
    halfspaces = set(equalities)
    for nrm, off in pfacets:
        full = [0] * n
        for i, c in zip(coords, nrm):
            full[i] = c
        halfspaces.add((tuple(full), Fraction(off, scale)))
    return Polytope(n, tuple(vertices), tuple(sorted(halfspaces)), k)


def polytope_from_halfspaces(halfspaces: Sequence, dim: int) -> Polytope:
    """Vertex enumeration for a bounded system ``normal . x <= offset``."""
    hs = [(tuple(q(c) for c in n), q(b)) for n, b in halfspaces]
    for n, b in hs:
        if not any(n) and b < 0:
            return empty_polytope(dim)
    hs = [(n, b) for n, b in hs if any(n)]
    if dim == 0:
        return Polytope(0, ((),), (), 0)
    found = set()
    for combo in itertools.combinations(range(len(hs)), dim):
        mat = [hs[i][0] for i in combo]
        if det(mat) == 0:
            continue
        x = solve(mat, [hs[i][1] for i in combo])
        if x is not None and all(dot(n, x) <= b for n, b in hs):
            found.add(x)
    if not found:
        return empty_polytope(dim)
    return convex_hull(found, dim=dim)


def _faces_below(face: frozenset, k: int, incidences: list, verts: list) -> set:
    out = set()
    for inc in incidences:
        sub = face & inc
        if sub != face and len(sub) >= k and affine_rank([verts[i] for i in sorted(sub)]) == k - 1:
            out.add(sub)
    return out


def triangulate(P: Polytope) -> list[list[RationalVector]]:
    """Pulling triangulation from the smallest vertex of each face."""
    if not P.is_full_dimensional or P.is_empty:
        raise ValueError("triangulate needs a full-dimensional polytope")
    n = P.dim
    verts = list(P.vertices)
    incidences = [
        frozenset(i for i, v in enumerate(verts) if dot(nrm, v) == off)
        for nrm, off in P.halfspaces
    ]
    memo = {}

    def tri(face: frozenset, k: int):
        key = (face, k)
        if key in memo:
            return memo[key]
        if k == 0:
            res = [[min(face)]]
        else:
            v0 = min(face)
            res = []
            for sub in sorted(_faces_below(face, k, incidences, verts), key=sorted):
                if v0 in sub:
                    continue
                for s in tri(sub, k - 1):
                    res.append([v0] + s)
        memo[key] = res
        return res

    return [[verts[i] for i in s] for s in tri(frozenset(range(len(verts))), n)]


def volume(P: Polytope) -> Fraction:
    """Euclidean volume in the ambient dimension (0 for degenerate polytopes)."""
    if P.is_empty or not P.is_full_dimensional:
        return Fraction(0)
    n = P.dim
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for simplex in triangulate(P):
        v0 = simplex[0]
        total += abs(det([[a - b for a, b in zip(v, v0)] for v in simplex[1:]]))
    return total / math.factorial(n)


def affine_volume(P: Polytope) -> Fraction:
    """Volume inside the affine span, measured through a coordinate projection.

    The projection onto the first set of coordinates that is injective on the
    span is used, so the answer is exact and agrees with :func:`volume` for
    full-dimensional polytopes.
    """
    if P.is_empty:
        return Fraction(0)
    if P.affine_dim == 0:
        return Fraction(1)
    base = P.vertices[0]
    diffs = [[a - b for a, b in zip(v, base)] for v in P.vertices[1:]]
    _, piv = rref_python(diffs, P.dim)
    proj = [tuple(v[i] for i in piv) for v in P.vertices]
    return volume(convex_hull(proj))


def slice_polytope(P: Polytope, a: Sequence) -> Polytope:
    """``{x : (a, x) in P}`` for a prefix ``a`` of length r < dim."""
    a = rvec(a)
    r = len(a)
    if r >= P.dim:
        raise ValueError(f"slice prefix of length {r} needs ambient dimension > {r}")
    out_dim = P.dim - r
    if P.is_empty:
        return empty_polytope(out_dim)
    hs = [(n[r:], b - dot(n[:r], a)) for n, b in P.halfspaces]
    return polytope_from_halfspaces(hs, out_dim)


def minkowski_sum(P: Polytope, Q: Polytope) -> Polytope:
    return convex_hull(
        [tuple(a + b for a, b in zip(u, v)) for u in P.vertices for v in Q.vertices],
        dim=P.dim,
    )


def mixed_volume(polytopes: Sequence[Polytope]) -> Fraction:
    """Normalized mixed volume, ``MV(P, ..., P) = n! vol(P)``."""
    n = len(polytopes)
    total = Fraction(0)
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            acc = polytopes[subset[0]]
            for i in subset[1:]:
                acc = minkowski_sum(acc, polytopes[i])
            total += (-1) ** (n - size) * volume(acc)
    return total


def lattice_points(P: Polytope) -> list[tuple[int, ...]]:
    if P.is_empty:
        return []
    box = P.bounding_box()
    ranges = [range(math.ceil(lo), math.floor(hi) + 1) for lo, hi in box]
    return [u for u in itertools.product(*ranges) if P.contains(u)]


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalCone:
    """A pointed cone in R^{d+1} whose generators have positive last coordinate."""

    generators: tuple
    dim: int

    def contains(self, point: Sequence, body: Polytope | None = None) -> bool:
        point = rvec(point)
        t = point[-1]
        if t < 0:
            return False
        if body is None:
            body = convex_hull(
                [tuple(Fraction(c, g[-1]) for c in g[:-1]) for g in self.generators],
                dim=self.dim - 1,
            )
        if t == 0:
            return all(c == 0 for c in point)
        return body.contains(tuple(c / t for c in point[:-1]))

    def to_json(self) -> dict:
        return {"dim": self.dim, "generators": [list(g) for g in self.generators]}


def cone_and_body(graded_points: Iterable[tuple[Sequence, int]]):
    """Cone spanned by graded points ``(v, m)`` and its slice at height one."""
    pts = list(graded_points)
    if not pts:
        raise ValueError("cone_and_body needs at least one graded point")
    scaled = []
    for v, m in pts:
        if m < 1:
            raise ValueError(f"level must be >= 1, got {m}")
        scaled.append(tuple(q(c) / m for c in v))
    d = len(scaled[0])
    body = convex_hull(scaled, dim=d)
    gens = []
    for v in body.vertices:
        den = lcm_of_denominators(v)
        gens.append(primitive([int(c * den) for c in v] + [den]))
    return RationalCone(tuple(sorted(gens)), d + 1), body
