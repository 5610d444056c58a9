"""Horosymmetric root data: DH polynomial, 2ρ_H, restricted chamber, projection.

Coordinates: vectors of X(T)⊗R are given in a user-chosen ambient basis (the
catalog uses fundamental weights, plus a κ-orthogonal torus direction). The
spherical lattice M⊗R is described by a basis of ambient vectors; the map P
sends ambient coordinates to coordinates in that basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .geometry import PolyCone, dual_cone
from .polynomial import Poly, product
from .rational import Matrix, Vector, dot, inverse, mat_mul, mat_vec, rank, transpose, vec, zeros


class DatumError(ValueError):
    clause = "datum"

    def __init__(self, message: str, clause: str | None = None):
        super().__init__(message)
        if clause is not None:
            self.clause = clause


class InvalidKilling(DatumError):
    clause = "InvalidKilling"


class ChamberDegenerate(DatumError):
    clause = "ChamberDegenerate"


@dataclass(frozen=True)
class HorosymmetricDatum:
    ambient_rank: int
    killing: Matrix
    roots_Qu: tuple[Vector, ...]
    roots_s_plus: tuple[Vector, ...]
    restricted_roots: tuple[tuple[Vector, int], ...]
    spherical_basis: tuple[Vector, ...]
    projection_P: Matrix
    soliton_directions: tuple[Vector, ...]
    central_directions: tuple[Vector, ...]
    chart_origin: Vector
    basis_names: tuple[str, ...] = field(default=())

    @property
    def rank(self) -> int:
        """Rank of the spherical lattice."""
        return len(self.spherical_basis)

    def project(self, q: Sequence[Fraction]) -> Vector:
        return mat_vec(self.projection_P, q)

    def lift(self, c: Sequence[Fraction]) -> Vector:
        """Ambient vector sum c_j e_j for ℳ-coordinates c."""
        out = zeros(self.ambient_rank)
        for cj, e in zip(c, self.spherical_basis):
            out = tuple(a + cj * b for a, b in zip(out, e))
        return out

    def chart(self, q: Sequence[Fraction]) -> Vector:
        """ℳ-coordinates of q measured from the chart origin."""
        return tuple(a - b for a, b in zip(self.project(q), self.project(self.chart_origin)))

    @property
    def killing_M(self) -> Matrix:
        """κ restricted to ℳ⊗R in spherical coordinates."""
        e = transpose(self.spherical_basis)
        return mat_mul(mat_mul(self.spherical_basis, self.killing), e)

    def pairing(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
        return dot(u, mat_vec(self.killing, v))

    @property
    def horospherical(self) -> bool:
        return not self.roots_s_plus


def _positive_definite(m: Sequence[Sequence[Fraction]]) -> bool:
    a = [list(map(Fraction, r)) for r in m]
    n = len(a)
    for c in range(n):
        if a[c][c] <= 0:
            return False
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return True


def _vectors(rows, n: int, what: str) -> tuple[Vector, ...]:
    out = tuple(vec(r) for r in rows)
    for r in out:
        if len(r) != n:
            raise DatumError(f"{what}: expected length {n}, got {len(r)}", what)
    return out


def build_datum(spec: Mapping) -> HorosymmetricDatum:
    """Validate a declarative datum description.

    Keys: killing (matrix), roots_Qu, roots_s_plus, restricted_roots (list of
    {root, multiplicity}), spherical_basis, optional projection (matrix;
    default is the κ-orthogonal projection), soliton_directions,
    central_directions (functionals in ℳ-coordinates), chart_origin,
    basis (names).
    """
    killing = tuple(vec(r) for r in spec["killing"])
    n = len(killing)
    if any(len(r) != n for r in killing):
        raise InvalidKilling("Killing matrix is not square")
    if any(killing[i][j] != killing[j][i] for i in range(n) for j in range(n)):
        raise InvalidKilling("Killing matrix is not symmetric")
    if not _positive_definite(killing):
        raise InvalidKilling("Killing matrix is not positive definite")
    qu = _vectors(spec.get("roots_Qu", []), n, "roots_Qu")
    sp = _vectors(spec.get("roots_s_plus", []), n, "roots_s_plus")
    restricted = []
    for item in spec.get("restricted_roots", []):
        root = vec(item["root"])
        if len(root) != n:
            raise DatumError("restricted root has wrong length", "restricted_roots")
        mult = int(item.get("multiplicity", 1))
        if mult < 1:
            raise DatumError("multiplicity must be positive", "restricted_roots")
        restricted.append((root, mult))
    basis = _vectors(spec["spherical_basis"], n, "spherical_basis")
    r = len(basis)
    if r == 0 or rank(list(basis), n) != r:
        raise DatumError("spherical basis must be nonempty and independent", "spherical_basis")
    if "projection" in spec:
        proj = tuple(vec(row) for row in spec["projection"])
        if len(proj) != r or any(len(row) != n for row in proj):
            raise DatumError("projection must be rank(ℳ) x ambient", "projection")
    else:
        kb = mat_mul(killing, transpose(basis))  # n x r
        gram = mat_mul(basis, kb)  # r x r
        proj = mat_mul(inverse(gram), transpose(kb))
    ident = mat_mul(proj, transpose(basis))
    if any(ident[i][j] != (1 if i == j else 0) for i in range(r) for j in range(r)):
        raise DatumError("projection is not the identity on ℳ⊗R", "projection")
    soliton = _vectors(spec.get("soliton_directions", []), r, "soliton_directions")
    central = _vectors(spec.get("central_directions", []), r, "central_directions")
    origin = vec(spec.get("chart_origin", [0] * n))
    if len(origin) != n:
        raise DatumError("chart origin has wrong length", "chart_origin")
    names = tuple(spec.get("basis", ()))
    d = HorosymmetricDatum(n, killing, qu, sp, tuple(restricted), basis, proj, soliton, central, origin, names)
    chamber = positive_chamber(d)[0]
    if chamber.dim_ambient - len(chamber.equations) != r:
        raise ChamberDegenerate("restricted chamber has empty interior in ℳ⊗R")
    for beta in sp:
        g = mat_vec(basis, mat_vec(killing, beta))
        if all(x == 0 for x in g):
            raise ChamberDegenerate("a restricted root pairs trivially with ℳ⊗R")
    return d


@dataclass(frozen=True)
class DHPolynomial:
    factors: tuple[Poly, ...]
    expanded: Poly

    def __call__(self, q: Sequence):
        return self.expanded(q)

    @property
    def degree(self) -> int:
        return len(self.factors)


def dh_polynomial(d: HorosymmetricDatum) -> DHPolynomial:
    """P_DH(q) = prod over Φ_Qu ∪ Φ_s^+ of κ(α, q), in ambient coordinates."""
    forms = [tuple(mat_vec(d.killing, a)) for a in d.roots_Qu + d.roots_s_plus]
    factors = tuple(Poly.linear(f) for f in sorted(forms))
    return DHPolynomial(factors, product(factors, d.ambient_rank))


def two_rho_H(d: HorosymmetricDatum) -> tuple[Vector, Vector]:
    """(2ρ_H in ambient coordinates, its image under P)."""
    total = zeros(d.ambient_rank)
    for a in d.roots_Qu + d.roots_s_plus:
        total = tuple(x + y for x, y in zip(total, a))
    return total, d.project(total)


def positive_chamber(d: HorosymmetricDatum) -> tuple[PolyCone, PolyCone]:
    """C̄⁺ ⊂ ℳ⊗R in spherical coordinates, and its dual under κ."""
    r = len(d.spherical_basis)
    normals = []
    for beta in d.roots_s_plus:
        g = mat_vec(d.spherical_basis, mat_vec(d.killing, beta))
        normals.append(tuple(-x for x in g))
    chamber = PolyCone.from_hrep(normals, r) if normals else PolyCone.full_space(r)
    return chamber, dual_cone(chamber, d.killing_M)


def weyl_reflection(d: HorosymmetricDatum, beta: Sequence[Fraction], p: Sequence[Fraction]) -> Vector:
    """s_β(p) = p − 2κ(p,β)/κ(β,β) β, for consistency checks."""
    c = 2 * d.pairing(p, beta) / d.pairing(beta, beta)
    return tuple(x - c * y for x, y in zip(p, beta))
