"""Exact rational convex geometry.

Polytopes, polyhedral cones and polyhedra carry both representations. The
H-representation is canonical: affine-hull equations in reduced row echelon
form, facet inequalities reduced modulo the equations and scaled to primitive
integer vectors, sorted. Vertex lists are sorted lexicographically. No floating
point is used anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import factorial
from typing import Iterable, Sequence

from .rational import (
    Vector,
    add,
    det,
    dot,
    is_zero,
    primitive,
    rank,
    rref,
    scale,
    sub,
    to_fraction,
    unit,
    vec,
    zeros,
)


class GeometryError(Exception):
    pass


class Unbounded(GeometryError):
    pass


class Empty(GeometryError):
    pass


class DimensionMismatch(GeometryError):
    pass


Halfspace = tuple[Vector, Fraction]  # <normal, x> <= offset
Hyperplane = tuple[Vector, Fraction]  # <normal, x> == offset


# -- double description -------------------------------------------------------

def _neg(u: Vector) -> Vector:
    return tuple(-a for a in u)


def dd_cone(rows: Sequence[Vector], n: int) -> tuple[list[Vector], list[Vector]]:
    """Generators of the cone {x : <a, x> >= 0 for every row a}.

    Returns (extreme rays modulo lineality, lineality basis). Incremental
    double description with the combinatorial adjacency test.
    """
    lin: list[Vector] = [unit(n, i) for i in range(n)]
    rays: list[tuple[Vector, frozenset]] = []
    for k, a in enumerate(rows):
        vals = [dot(a, l) for l in lin]
        j = next((i for i, v in enumerate(vals) if v != 0), None)
        if j is not None:
            p, pv = lin[j], vals[j]
            if pv < 0:
                p, pv = _neg(p), -pv
            lin = [sub(l, scale(v / pv, p)) for i, (l, v) in enumerate(zip(lin, vals)) if i != j]
            new = []
            for r, z in rays:
                rv = dot(a, r)
                new.append((primitive(sub(r, scale(rv / pv, p))), z | {k}))
            done = frozenset(range(k))
            new.append((primitive(p), done))
            rays = new
            continue
        scored = [(r, z, dot(a, r)) for r, z in rays]
        pos = [(i, t) for i, t in enumerate(scored) if t[2] > 0]
        neg = [(i, t) for i, t in enumerate(scored) if t[2] < 0]
        new = [(r, z | {k}) if v == 0 else (r, z) for r, z, v in scored if v >= 0]
        need = n - len(lin) - 2
        zsets = [z for _, z in rays]
        for ip, (rp, zp, vp) in pos:
            for iq, (rn, zn, vn) in neg:
                common = zp & zn
                if len(common) < need:
                    continue
                if any(common <= z for i, z in enumerate(zsets) if i != ip and i != iq):
                    continue
                comb = sub(scale(vp, rn), scale(vn, rp))
                new.append((primitive(comb), common | {k}))
        rays = new
    seen = {}
    for r, _ in rays:
        if not is_zero(r):
            seen.setdefault(r, None)
    return list(seen), lin


def _reduce_mod(eq_rows: Sequence[Vector], pivots: Sequence[int], v: Vector) -> Vector:
    for row, p in zip(eq_rows, pivots):
        if v[p] != 0:
            v = sub(v, scale(v[p], row))
    return v


def _canonical_hrep(
    ineq: Iterable[tuple[Vector, Fraction]], eqs: Iterable[tuple[Vector, Fraction]], n: int
) -> tuple[tuple[Halfspace, ...], tuple[Hyperplane, ...]]:
    eq_rows = [tuple(nv) + (c,) for nv, c in eqs]
    red, pivots = rref(eq_rows, n) if eq_rows else ([], [])
    if any(p >= n for p in pivots):
        raise Empty("inconsistent affine equations")
    out = set()
    for nv, c in ineq:
        w = _reduce_mod(red, pivots, tuple(nv) + (c,))
        if is_zero(w[:n]):
            if w[n] < 0:
                raise Empty("infeasible constant inequality")
            continue
        w = primitive(w)
        out.add((w[:n], w[n]))
    equations = tuple((row[:n], row[n]) for row in red)
    return tuple(sorted(out)), equations


def _facets_of_generators(
    points: Sequence[Vector], rays: Sequence[Vector], lines: Sequence[Vector], n: int
):
    """H-representation of conv(points) + cone(rays) + span(lines)."""
    gens = [(Fraction(1),) + tuple(p) for p in points]
    gens += [(Fraction(0),) + tuple(r) for r in rays]
    for l in lines:
        gens.append((Fraction(0),) + tuple(l))
        gens.append((Fraction(0),) + _neg(tuple(l)))
    dual_rays, dual_lin = dd_cone(gens, n + 1)
    ineq = [(_neg(y[1:]), y[0]) for y in dual_rays if not is_zero(y[1:])]
    eqs = [(_neg(y[1:]), y[0]) for y in dual_lin]
    return _canonical_hrep(ineq, eqs, n)


def _is_vertex(p: Vector, ineq, eqs, n: int) -> bool:
    tight = [nv for nv, c in ineq if dot(nv, p) == c]
    return rank(tight + [nv for nv, _ in eqs], n) == n


def vertices_from_hrep(
    hrep: Sequence[tuple[Sequence, object]], equations: Sequence[tuple[Sequence, object]] = ()
) -> list[Vector]:
    """All extreme points of {<n, x> <= c} (and optional equalities), sorted."""
    ineq = [(vec(nv), to_fraction(c)) for nv, c in hrep]
    eqs = [(vec(nv), to_fraction(c)) for nv, c in equations]
    rows_all = [nv for nv, _ in ineq] + [nv for nv, _ in eqs]
    if not rows_all:
        raise Unbounded("no constraints")
    n = len(rows_all[0])
    if any(len(r) != n for r in rows_all):
        raise DimensionMismatch("constraints of different dimensions")
    rows = [(c,) + _neg(nv) for nv, c in ineq]
    for nv, c in eqs:
        rows.append((c,) + _neg(nv))
        rows.append((-c,) + tuple(nv))
    rows.append(unit(n + 1, 0))
    rays, lin = dd_cone(rows, n + 1)
    pts = [tuple(a / r[0] for a in r[1:]) for r in rays if r[0] > 0]
    if not pts:
        raise Empty("no feasible point")
    if lin or any(r[0] == 0 for r in rays):
        raise Unbounded("recession direction found")
    return sorted(set(pts))


def hrep_from_vertices(points: Sequence[Sequence]) -> tuple[tuple[Halfspace, ...], tuple[Hyperplane, ...]]:
    """Minimal facet inequalities of conv(points) and its affine-hull equations."""
    pts = [vec(p) for p in points]
    if not pts:
        raise Empty("empty point list")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise DimensionMismatch("points of different dimensions")
    return _facets_of_generators(pts, [], [], n)


# -- polytopes ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Polytope:
    """Bounded convex polytope with canonical V- and H-representations."""

    vertices: tuple[Vector, ...]
    inequalities: tuple[Halfspace, ...]
    equations: tuple[Hyperplane, ...]

    @classmethod
    def from_vertices(cls, points: Iterable[Sequence]) -> "Polytope":
        pts = sorted(set(vec(p) for p in points))
        ineq, eqs = hrep_from_vertices(pts)
        n = len(pts[0])
        verts = tuple(p for p in pts if _is_vertex(p, ineq, eqs, n))
        return cls(verts, ineq, eqs)

    @classmethod
    def from_hrep(cls, hrep, equations=()) -> "Polytope":
        return cls.from_vertices(vertices_from_hrep(hrep, equations))

    @classmethod
    def point(cls, p: Sequence) -> "Polytope":
        return cls.from_vertices([p])

    @classmethod
    def segment(cls, a: Sequence, b: Sequence) -> "Polytope":
        return cls.from_vertices([a, b])

    @property
    def dim_ambient(self) -> int:
        return len(self.vertices[0])

    @property
    def dim_affine(self) -> int:
        return self.dim_ambient - len(self.equations)

    @property
    def hrep(self) -> tuple[Halfspace, ...]:
        return self.inequalities

    def __eq__(self, other) -> bool:
        return isinstance(other, Polytope) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        from .rational import fmt_vec

        return "Polytope[" + ", ".join(fmt_vec(v) for v in self.vertices) + "]"

    def contains(self, p: Sequence) -> bool:
        p = vec(p)
        return all(dot(nv, p) == c for nv, c in self.equations) and all(
            dot(nv, p) <= c for nv, c in self.inequalities
        )

    def translate(self, v: Sequence) -> "Polytope":
        v = vec(v)
        return Polytope.from_vertices(add(p, v) for p in self.vertices)

    def scale(self, c) -> "Polytope":
        c = Fraction(c)
        if c < 0:
            raise ValueError("negative dilation")
        return Polytope.from_vertices(scale(c, p) for p in self.vertices)

    def linear_image(self, m: Sequence[Sequence[Fraction]]) -> "Polytope":
        return Polytope.from_vertices(tuple(dot(row, p) for row in m) for p in self.vertices)

    def affine_image(self, m, b) -> "Polytope":
        b = vec(b)
        return Polytope.from_vertices(add(tuple(dot(row, p) for row in m), b) for p in self.vertices)

    def centroid_of_vertices(self) -> Vector:
        k = len(self.vertices)
        return tuple(sum(c) / k for c in zip(*self.vertices))

    @cached_property
    def chart_columns(self) -> tuple[int, ...]:
        """Free coordinates parametrizing the affine hull (non-pivot columns)."""
        _, pivots = rref([nv for nv, _ in self.equations], self.dim_ambient) if self.equations else ([], [])
        return tuple(c for c in range(self.dim_ambient) if c not in pivots)

    def chart(self, p: Sequence[Fraction]) -> Vector:
        return tuple(p[c] for c in self.chart_columns)

    def volume(self) -> Fraction:
        """Lebesgue measure of the chart image (points have volume 1)."""
        return sum((simplex_volume(self, s) for s in triangulate(self)), Fraction(0))

    def facet_vertices(self, facet: Halfspace) -> list[Vector]:
        nv, c = facet
        return [p for p in self.vertices if dot(nv, p) == c]


def support_eval(p: Polytope, xi: Sequence) -> Fraction:
    xi = vec(xi)
    if len(xi) != p.dim_ambient:
        raise DimensionMismatch("functional and polytope dimensions differ")
    return max(dot(xi, v) for v in p.vertices)


def minkowski_sum(a: Polytope, b: Polytope) -> Polytope:
    if a.dim_ambient != b.dim_ambient:
        raise DimensionMismatch(f"{a.dim_ambient} != {b.dim_ambient}")
    return Polytope.from_vertices(add(u, v) for u in a.vertices for v in b.vertices)


def minkowski_sum_all(polys: Sequence[Polytope]) -> Polytope:
    return reduce(minkowski_sum, polys)


# -- cones and polyhedra ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PolyCone:
    """Polyhedral cone: extreme rays modulo lineality, plus H-representation.

    Inequalities are stored as <normal, x> <= 0.
    """

    generators: tuple[Vector, ...]
    lineality: tuple[Vector, ...]
    inequalities: tuple[Vector, ...]
    equations: tuple[Vector, ...]
    dim_ambient: int

    @classmethod
    def from_generators(cls, rays: Iterable[Sequence], n: int, lineality: Iterable[Sequence] = ()) -> "PolyCone":
        rays = [vec(r) for r in rays]
        lines = [vec(l) for l in lineality]
        ineq, eqs = _facets_of_generators([zeros(n)], rays, lines, n)
        return cls._from_hrep_canonical([nv for nv, _ in ineq], [nv for nv, _ in eqs], n)

    @classmethod
    def from_hrep(cls, normals: Iterable[Sequence], n: int, equations: Iterable[Sequence] = ()) -> "PolyCone":
        """Cone {x : <normal, x> <= 0, <e, x> = 0}."""
        normals = [vec(v) for v in normals]
        eqs = [vec(v) for v in equations]
        rows = [_neg(v) for v in normals] + eqs + [_neg(v) for v in eqs]
        rays, lin = dd_cone(rows, n) if rows else ([], [unit(n, i) for i in range(n)])
        return cls.from_generators(rays, n, lin)

    @classmethod
    def _from_hrep_canonical(cls, normals, eqs, n) -> "PolyCone":
        rows = [_neg(v) for v in normals] + list(eqs) + [_neg(v) for v in eqs]
        rays, lin = dd_cone(rows, n) if rows else ([], [unit(n, i) for i in range(n)])
        lin_red, lin_piv = rref(lin, n) if lin else ([], [])
        gens = sorted(set(primitive(_reduce_mod(lin_red, lin_piv, r)) for r in rays))
        gens = [g for g in gens if not is_zero(g)]
        return cls(tuple(gens), tuple(lin_red), tuple(normals), tuple(eqs), n)

    @classmethod
    def full_space(cls, n: int) -> "PolyCone":
        return cls.from_generators([], n, [unit(n, i) for i in range(n)])

    @classmethod
    def zero(cls, n: int) -> "PolyCone":
        return cls.from_generators([], n)

    @property
    def pointed(self) -> bool:
        return not self.lineality

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolyCone)
            and self.generators == other.generators
            and self.lineality == other.lineality
        )

    def __hash__(self) -> int:
        return hash((self.generators, self.lineality))

    def __repr__(self) -> str:
        return f"PolyCone(rays={list(self.generators)}, lineality={list(self.lineality)})"

    def contains(self, p: Sequence) -> bool:
        p = vec(p)
        return all(dot(e, p) == 0 for e in self.equations) and all(dot(nv, p) <= 0 for nv in self.inequalities)

    def negate(self) -> "PolyCone":
        return PolyCone.from_generators([_neg(g) for g in self.generators], self.dim_ambient, self.lineality)

    @property
    def hrep(self) -> tuple[Halfspace, ...]:
        return tuple((nv, Fraction(0)) for nv in self.inequalities)


def dual_cone(c: PolyCone, form: Sequence[Sequence] | None = None) -> PolyCone:
    """{y : B(y, x) >= 0 for all x in c}; B defaults to the standard pairing."""
    n = c.dim_ambient
    if form is None:
        apply = lambda x: x  # noqa: E731
    else:
        b = [vec(row) for row in form]
        apply = lambda x: tuple(dot(row, x) for row in b)  # noqa: E731
    rows = [apply(g) for g in c.generators]
    for l in c.lineality:
        bl = apply(l)
        rows += [bl, _neg(bl)]
    if not rows:
        return PolyCone.full_space(n)
    rays, lin = dd_cone(rows, n)
    return PolyCone.from_generators(rays, n, lin)


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """base + recession, with H-representation of the sum."""

    base: Polytope
    recession: PolyCone
    inequalities: tuple[Halfspace, ...]
    equations: tuple[Hyperplane, ...]

    @property
    def dim_ambient(self) -> int:
        return self.base.dim_ambient

    @property
    def dim_affine(self) -> int:
        return self.dim_ambient - len(self.equations)

    @property
    def hrep(self) -> tuple[Halfspace, ...]:
        return self.inequalities

    def contains(self, p: Sequence) -> bool:
        p = vec(p)
        return all(dot(nv, p) == c for nv, c in self.equations) and all(
            dot(nv, p) <= c for nv, c in self.inequalities
        )

    def translate(self, v: Sequence) -> "Polyhedron":
        return sum_with_cone(self.base.translate(v), self.recession)


def sum_with_cone(p: Polytope, c: PolyCone) -> Polyhedron:
    if p.dim_ambient != c.dim_ambient:
        raise DimensionMismatch(f"{p.dim_ambient} != {c.dim_ambient}")
    ineq, eqs = _facets_of_generators(list(p.vertices), list(c.generators), list(c.lineality), p.dim_ambient)
    return Polyhedron(p, c, ineq, eqs)


# -- relative interior --------------------------------------------------------------

@dataclass(frozen=True)
class RelintCertificate:
    """Why a point is (not) in the relative interior.

    kind is "interior" (epsilon: p +- epsilon*d stays inside for every direction
    d of the affine hull with max-norm <= 1), "tight" or "violated" (facet), or
    "off_hull" (an affine-hull equation fails; facet holds that equation).
    """

    kind: str
    facet: tuple[Vector, Fraction] | None = None
    epsilon: Fraction | None = None
    slack: Fraction | None = None


@dataclass(frozen=True)
class RelintResult:
    inside: bool
    certificate: RelintCertificate

    def __bool__(self) -> bool:
        return self.inside


def contains_relint(s, p: Sequence) -> RelintResult:
    """Exact relative-interior membership for Polytope, Polyhedron or PolyCone."""
    p = vec(p)
    if isinstance(s, PolyCone):
        ineq = [(nv, Fraction(0)) for nv in s.inequalities]
        eqs = [(e, Fraction(0)) for e in s.equations]
    else:
        ineq, eqs = list(s.inequalities), list(s.equations)
    if len(p) != s.dim_ambient:
        raise DimensionMismatch("point and set dimensions differ")
    for nv, c in eqs:
        if dot(nv, p) != c:
            return RelintResult(False, RelintCertificate("off_hull", (nv, c), slack=c - dot(nv, p)))
    slacks = [(c - dot(nv, p), nv, c) for nv, c in ineq]
    worst = min(slacks, key=lambda t: t[0], default=None)
    if worst is not None and worst[0] < 0:
        return RelintResult(False, RelintCertificate("violated", (worst[1], worst[2]), slack=worst[0]))
    for sl, nv, c in slacks:
        if sl == 0:
            return RelintResult(False, RelintCertificate("tight", (nv, c), slack=sl))
    eps = min((sl / sum(abs(a) for a in nv) for sl, nv, c in slacks), default=Fraction(1))
    return RelintResult(True, RelintCertificate("interior", epsilon=eps))


def hull_directions(s) -> list[Vector]:
    """Basis of the direction space of the affine hull."""
    from .rational import nullspace

    eqs = [nv for nv, _ in s.equations] if not isinstance(s, PolyCone) else list(s.equations)
    return nullspace(eqs, s.dim_ambient)


# -- triangulation ------------------------------------------------------------------

Simplex = tuple[Vector, ...]


def _pulling(poly: Polytope) -> list[Simplex]:
    d = poly.dim_affine
    if len(poly.vertices) == d + 1:
        return [poly.vertices]
    v0 = poly.vertices[0]
    out: list[Simplex] = []
    for facet in poly.inequalities:
        fv = poly.facet_vertices(facet)
        if v0 in fv:
            continue
        for s in _pulling(Polytope.from_vertices(fv)):
            out.append((v0,) + s)
    return out


def _fan(poly: Polytope) -> list[Simplex]:
    d = poly.dim_affine
    if len(poly.vertices) == d + 1:
        return [poly.vertices]
    c = poly.centroid_of_vertices()
    out: list[Simplex] = []
    for facet in poly.inequalities:
        for s in _pulling(Polytope.from_vertices(poly.facet_vertices(facet))):
            out.append((c,) + s)
    return out


def triangulate(poly: Polytope, strategy: str = "pulling") -> list[Simplex]:
    """Simplices covering poly with disjoint relative interiors.

    "pulling" cones from the lexicographically first vertex over the facets
    avoiding it; "fan" cones from the vertex centroid over all facets.
    """
    if strategy == "pulling":
        return _pulling(poly)
    if strategy == "fan":
        return _fan(poly)
    raise ValueError(f"unknown strategy {strategy!r}")


def simplex_volume(poly: Polytope, s: Simplex) -> Fraction:
    """Volume of a simplex lying in poly's affine hull, in poly's chart."""
    d = len(s) - 1
    if d == 0:
        return Fraction(1)
    base = poly.chart(s[0])
    m = [sub(poly.chart(v), base) for v in s[1:]]
    return abs(det(m)) / factorial(d)


def simplex_chart_det(poly: Polytope, s: Simplex) -> Fraction:
    d = len(s) - 1
    if d == 0:
        return Fraction(1)
    base = poly.chart(s[0])
    return abs(det([sub(poly.chart(v), base) for v in s[1:]]))


__all__ = [
    "Polytope",
    "PolyCone",
    "Polyhedron",
    "RelintResult",
    "RelintCertificate",
    "Unbounded",
    "Empty",
    "DimensionMismatch",
    "vertices_from_hrep",
    "hrep_from_vertices",
    "minkowski_sum",
    "minkowski_sum_all",
    "sum_with_cone",
    "contains_relint",
    "support_eval",
    "dual_cone",
    "triangulate",
    "simplex_volume",
    "dd_cone",
    "hull_directions",
]
