"""Exact and certified integration over polytopes, and weighted DH barycenters.

On a simplex with vertices v_0..v_d, substituting x = sum λ_i v_i turns a
polynomial into a form in the barycentric coordinates λ, and

    ∫_{std simplex} λ^a e^{z·λ} dσ = a! · exp[z_0^(a_0+1), ..., z_d^(a_d+1)]

where exp[...] is the divided difference of exp on the multiset of nodes
(each z_i repeated a_i + 1 times). With z = 0 this is the Dirichlet integral
a!/(|a|+d)!. The divided difference is summed as e^c Σ_j h_j(z−c)/(j+m−1)!
with c = min z, so every term is nonnegative, and the series tail is bounded
analytically.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath

from .geometry import Polytope, simplex_chart_det, triangulate
from .polynomial import Poly
from .rational import Vector, dot, vec

DEFAULT_DPS = 50


class QuadratureError(Exception):
    pass


class ToleranceUnreachable(QuadratureError):
    pass


class DegenerateMass(QuadratureError):
    pass


class NonpositiveWeight(QuadratureError):
    pass


def default_tolerance() -> float:
    env = os.environ.get("HOROKE_TOL")
    return float(env) if env else 1e-20


# -- certified scalars ------------------------------------------------------------

@dataclass(frozen=True)
class HighPrecisionScalar:
    """mpmath value with a rigorous absolute error bound."""

    value: mpmath.mpf
    error: mpmath.mpf

    @classmethod
    def exact(cls, x) -> "HighPrecisionScalar":
        x = Fraction(x)
        v = mpmath.mpf(x.numerator) / x.denominator
        return cls(v, _round(v))

    def __add__(self, other) -> "HighPrecisionScalar":
        other = _lift(other)
        v = self.value + other.value
        return HighPrecisionScalar(v, self.error + other.error + _round(v))

    __radd__ = __add__

    def __neg__(self) -> "HighPrecisionScalar":
        return HighPrecisionScalar(-self.value, self.error)

    def __sub__(self, other) -> "HighPrecisionScalar":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "HighPrecisionScalar":
        return _lift(other) - self

    def __mul__(self, other) -> "HighPrecisionScalar":
        other = _lift(other)
        v = self.value * other.value
        e = abs(self.value) * other.error + abs(other.value) * self.error + self.error * other.error
        return HighPrecisionScalar(v, e + _round(v))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "HighPrecisionScalar":
        other = _lift(other)
        lo = abs(other.value) - other.error
        if lo <= 0:
            raise ZeroDivisionError("divisor interval contains zero")
        v = self.value / other.value
        e = (self.error + abs(v) * other.error) / lo
        return HighPrecisionScalar(v, e + _round(v))

    def __rtruediv__(self, other) -> "HighPrecisionScalar":
        return _lift(other) / self

    @property
    def lo(self) -> mpmath.mpf:
        return self.value - self.error

    @property
    def hi(self) -> mpmath.mpf:
        return self.value + self.error

    def sign(self) -> int | None:
        """+1/-1 if certified, None if the interval contains zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return None

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"{mpmath.nstr(self.value, 25)} ± {mpmath.nstr(self.error, 3)}"


def _round(v) -> mpmath.mpf:
    return abs(v) * mpmath.ldexp(1, -mpmath.mp.prec + 2)


def _lift(x) -> HighPrecisionScalar:
    if isinstance(x, HighPrecisionScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return HighPrecisionScalar.exact(x)
    v = mpmath.mpf(x)
    return HighPrecisionScalar(v, _round(v))


# -- weights ----------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """Density e^{h∘ℓ} in ambient coordinates.

    constant: 1. affine: <coeffs, q> + const. power_affine: (affine)^k.
    exp_affine: exp(<coeffs, q> + const), coeffs may be mpmath numbers.
    """

    kind: str
    coeffs: tuple = ()
    const: object = Fraction(0)
    power: int = 1

    @classmethod
    def constant(cls) -> "WeightSpec":
        return cls("constant")

    @classmethod
    def affine(cls, coeffs: Sequence, const) -> "WeightSpec":
        return cls("affine", vec(coeffs), Fraction(const), 1)

    @classmethod
    def power_affine(cls, coeffs: Sequence, const, k: int) -> "WeightSpec":
        if k < 1:
            raise ValueError("power must be positive")
        return cls("power_affine", vec(coeffs), Fraction(const), int(k))

    @classmethod
    def exp_affine(cls, coeffs: Sequence, const=0) -> "WeightSpec":
        return cls("exp_affine", tuple(coeffs), const, 1)

    @property
    def exact(self) -> bool:
        if self.kind != "exp_affine":
            return True
        return all(isinstance(c, (int, Fraction)) and c == 0 for c in self.coeffs)

    def polynomial_part(self, n: int) -> Poly:
        if self.kind == "constant" or self.kind == "exp_affine":
            return Poly.const(n, 1)
        lin = Poly.linear(self.coeffs, self.const)
        return lin if self.kind == "affine" else lin**self.power

    def affine_value(self, q: Sequence) -> Fraction:
        return dot(self.coeffs, q) + self.const

    def check_positive(self, p: Polytope) -> None:
        if self.kind in ("affine", "power_affine"):
            for v in p.vertices:
                if self.affine_value(v) <= 0:
                    raise NonpositiveWeight(f"affine weight is not positive at vertex {v}")


# -- simplex integrals ------------------------------------------------------------

@lru_cache(maxsize=4096)
def _simplices(poly: Polytope, strategy: str) -> tuple:
    return tuple((s, simplex_chart_det(poly, s)) for s in triangulate(poly, strategy))


def _lambda_form(f: Poly, simplex: Sequence[Vector]) -> Poly:
    n = f.nvars
    matrix = [[v[k] for v in simplex] for k in range(n)]
    return f.affine_pullback(matrix, [0] * n)


def _dirichlet(a: Sequence[int]) -> Fraction:
    num = 1
    for k in a:
        num *= math.factorial(k)
    return Fraction(num, math.factorial(sum(a) + len(a) - 1))


def integrate_poly(p: Polytope, f: Poly, strategy: str = "pulling") -> Fraction:
    """Exact ∫_P f over the affine hull, Lebesgue measure in P's chart."""
    total = Fraction(0)
    for s, jac in _simplices(p, strategy):
        g = _lambda_form(f, s)
        total += jac * sum((c * _dirichlet(a) for a, c in g.terms.items()), Fraction(0))
    return total


def _series_terms(width: float, m: int, tol: float) -> int:
    """Smallest N whose tail bound (times (m-1)!) is below tol."""
    if width == 0:
        return 0
    n = max(int(math.ceil(width)), 1)
    while True:
        if n + 2 > width:
            log_tail = (n + 1) * math.log(width) - math.lgamma(n + 2) - math.log1p(-width / (n + 2))
            if log_tail < math.log(tol):
                return n
        n += 1
        if n > 100000:
            raise ToleranceUnreachable("exponent spread too large for the series")


def exp_divided_difference(nodes: Sequence, tol: float) -> HighPrecisionScalar:
    """exp[nodes] with certified error, relative to the leading term."""
    zs = [mpmath.mpf(z) if not isinstance(z, Fraction) else mpmath.mpf(z.numerator) / z.denominator for z in nodes]
    m = len(zs)
    c = min(zs)
    us = [z - c for z in zs]
    w = max(us)
    n_terms = _series_terms(float(w), m, tol)
    h = [mpmath.mpf(0)] * (n_terms + 1)
    h[0] = mpmath.mpf(1)
    for u in us:
        if u == 0:
            continue
        for j in range(1, n_terms + 1):
            h[j] += u * h[j - 1]
    fact = mpmath.factorial(m - 1)
    s = mpmath.mpf(0)
    for j in range(n_terms + 1):
        fact_j = fact if j == 0 else fact * (j + m - 1)
        fact = fact_j
        s += h[j] / fact_j
    if w == 0:
        tail = mpmath.mpf(0)
    else:
        tail = (
            mpmath.power(w, n_terms + 1)
            / mpmath.factorial(n_terms + 1)
            / mpmath.factorial(m - 1)
            / (1 - w / (n_terms + 2))
        )
    scale = mpmath.exp(c)
    v = scale * s
    return HighPrecisionScalar(v, scale * tail + abs(v) * mpmath.ldexp(1, -mpmath.mp.prec + 2) * (n_terms + m + 2))


def integrate_poly_exp(
    p: Polytope,
    f: Poly,
    xi: Sequence,
    const=0,
    tol: float | None = None,
    strategy: str = "pulling",
    dps: int = DEFAULT_DPS,
):
    """∫_P f(q) e^{<ξ,q> + const} dq; exact Fraction when ξ = 0 and const = 0."""
    if all(isinstance(x, (int, Fraction)) and x == 0 for x in xi) and const == 0:
        return integrate_poly(p, f, strategy)
    tol = default_tolerance() if tol is None else tol
    with mpmath.workdps(dps):
        xi_mp = [_mp(x) for x in xi]
        total = HighPrecisionScalar(mpmath.mpf(0), mpmath.mpf(0))
        for s, jac in _simplices(p, strategy):
            zs = [mpmath.fsum(a * _mp(b) for a, b in zip(xi_mp, v)) + _mp(const) for v in s]
            g = _lambda_form(f, s)
            acc = HighPrecisionScalar(mpmath.mpf(0), mpmath.mpf(0))
            for a, coef in sorted(g.terms.items()):
                nodes = [z for z, k in zip(zs, a) for _ in range(k + 1)]
                dd = exp_divided_difference(nodes, tol)
                mult = coef
                for k in a:
                    mult *= math.factorial(k)
                acc = acc + dd * mult
            total = total + acc * jac
        return total


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


# -- barycenters ------------------------------------------------------------------

@dataclass(frozen=True)
class Barycenter:
    """Weighted DH barycenter in ambient coordinates.

    point entries are Fractions on the exact path, HighPrecisionScalar otherwise.
    """

    point: tuple
    mass: object
    exact: bool


def dh_barycenter(
    p: Polytope,
    dh,
    w: WeightSpec | None = None,
    tol: float | None = None,
    strategy: str = "pulling",
) -> Barycenter:
    """(∫ q w(q) dh(q) dq) / (∫ w(q) dh(q) dq) over P."""
    w = w or WeightSpec.constant()
    dh_poly = dh.expanded if hasattr(dh, "expanded") else dh
    n = p.dim_ambient
    w.check_positive(p)
    base = dh_poly * w.polynomial_part(n)
    coords = [Poly.var(n, k) for k in range(n)]
    if w.kind != "exp_affine" or w.exact:
        mass = integrate_poly(p, base, strategy)
        if mass == 0:
            raise DegenerateMass("weighted DH mass vanishes")
        point = tuple(integrate_poly(p, base * x, strategy) / mass for x in coords)
        return Barycenter(point, mass, True)
    with mpmath.workdps(DEFAULT_DPS):
        mass = integrate_poly_exp(p, base, w.coeffs, w.const, tol, strategy)
        if mass.sign() is None:
            raise DegenerateMass("weighted DH mass is not certified nonzero")
        point = tuple(integrate_poly_exp(p, base * x, w.coeffs, w.const, tol, strategy) / mass for x in coords)
    return Barycenter(point, mass, False)
