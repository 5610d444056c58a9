"""Rank-one real Monge-Ampère problems from a horosymmetric datum.

Coordinates: a ∈ 𝔞 is dual to the ℳ-coordinate. For the symmetric case the
coordinate is oriented so that 𝔞⁺ is the half-line a ≤ 0. The slope
variable p = du lives in Δ_i = −2 P(Δ⁺_i ∩ C̄⁺), and a moment point with
ℳ-coordinate c corresponds to p = −2c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from ..criteria import Decomposition
from ..geometry import Polytope
from ..polynomial import Poly
from ..quadrature import WeightSpec
from ..rootdata import HorosymmetricDatum, dh_polynomial, two_rho_H


class MASolverError(Exception):
    pass


class RankTooHigh(MASolverError):
    pass


class AssumptionViolated(MASolverError):
    def __init__(self, clause: str, message: str):
        super().__init__(f"assumption clause {clause}: {message}")
        self.clause = clause


_TAYLOR_LIMIT = 0.5
_TAYLOR_DEGREE = 24


@dataclass(frozen=True)
class Density:
    """Normalized density G(p) = P(x) e^{μx} / Z on [pmin, pmax], x = (p − mid)/hw.

    Stored as a pure polynomial in x when |μ| is small (exp expanded), which
    keeps the antiderivative well conditioned.
    """

    pmin: float
    pmax: float
    poly: tuple  # coefficients in x, low to high
    mu: float
    norm: float
    g_floor: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.pmin + self.pmax)

    @property
    def hw(self) -> float:
        return 0.5 * (self.pmax - self.pmin)

    @classmethod
    def build(cls, pmin: float, pmax: float, poly_p: Sequence[float], lam: float) -> "Density":
        """From P(p) (low to high, in p) and e^{λ p}."""
        mid, hw = 0.5 * (pmin + pmax), 0.5 * (pmax - pmin)
        # P(mid + hw x) in x
        px = np.zeros(1)
        basis = np.array([1.0])
        lin = np.array([mid, hw])
        for c in poly_p:
            px = npoly.polyadd(px, c * basis)
            basis = npoly.polymul(basis, lin)
        mu = lam * hw
        if abs(mu) <= _TAYLOR_LIMIT:
            ex = np.array([mu**m / math.factorial(m) for m in range(_TAYLOR_DEGREE + 1)])
            px = npoly.polymul(px, ex)
            mu = 0.0
        d = cls(pmin, pmax, tuple(float(c) for c in px), float(mu), 1.0, 0.0)
        z = d._antiderivative(1.0) - d._antiderivative(-1.0)
        if not z > 0:
            raise AssumptionViolated("4", "density has nonpositive mass")
        d = cls(pmin, pmax, d.poly, d.mu, float(z * hw), 0.0)
        xs = np.linspace(-1.0, 1.0, 257)
        gmax = float(np.max(d.G(d.mid + d.hw * xs)))
        return cls(pmin, pmax, d.poly, d.mu, d.norm, 1e-8 * gmax)

    @cached_property
    def _primitive(self) -> np.ndarray:
        """Q with (Q e^{μx})' = P e^{μx}, or ∫P when μ = 0."""
        p = np.asarray(self.poly)
        if self.mu == 0.0:
            return npoly.polyint(p)
        q = np.zeros(1)
        der = p
        k = 0
        while der.size and np.any(der != 0):
            q = npoly.polyadd(q, ((-1) ** k) * der / self.mu ** (k + 1))
            der = npoly.polyder(der)
            k += 1
        return q

    def _antiderivative(self, x):
        val = npoly.polyval(x, self._primitive)
        return val if self.mu == 0.0 else val * np.exp(self.mu * x)

    @cached_property
    def _ends(self) -> tuple[float, float, float]:
        """Antiderivative at x = −1 and the floored end slopes of the extension."""
        lo = max(float(self.G(self.pmin)), self.g_floor)
        hi = max(float(self.G(self.pmax)), self.g_floor)
        return float(self._antiderivative(-1.0)), lo, hi

    def G(self, p):
        """Exact density inside, 0 outside."""
        p = np.asarray(p, dtype=float)
        x = (p - self.mid) / self.hw
        inside = (x >= -1.0) & (x <= 1.0)
        xc = np.clip(x, -1.0, 1.0)
        val = npoly.polyval(xc, np.asarray(self.poly)) * np.exp(self.mu * xc) / self.norm
        return np.where(inside, val, 0.0)

    def G_jac(self, p):
        """Derivative of Phi: G inside, the end slopes outside.

        Inside, G is floored at 1e-6·g_floor so a density vanishing at an end
        keeps the Jacobian nonsingular; flux changes on faces where the floor
        is active are far below the Newton tolerance.
        """
        p = np.asarray(p, dtype=float)
        _, lo_slope, hi_slope = self._ends
        inside = np.maximum(self.G(p), 1e-6 * self.g_floor)
        out = np.where(p < self.pmin, lo_slope, inside)
        return np.where(p > self.pmax, hi_slope, out)

    def Phi(self, p):
        """Cumulative mass, extended linearly past both ends with the floored end slopes."""
        p = np.asarray(p, dtype=float)
        x = (p - self.mid) / self.hw
        xc = np.clip(x, -1.0, 1.0)
        a0, lo_slope, hi_slope = self._ends
        base = (self._antiderivative(xc) - a0) / self.norm * self.hw
        out = np.where(p < self.pmin, lo_slope * (p - self.pmin), base)
        return np.where(p > self.pmax, 1.0 + hi_slope * (p - self.pmax), out)

    def Phi_inverse(self, y, iterations: int = 200):
        """Slope with a given cumulative mass, by bisection on the extended flux."""
        y = np.asarray(y, dtype=float)
        lo = np.full(y.shape, self.pmin - 1.0)
        hi = np.full(y.shape, self.pmax + 1.0)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            f = self.Phi(mid)
            lo = np.where(f < y, mid, lo)
            hi = np.where(f < y, hi, mid)
            if np.all(hi - lo < 1e-15 * (1 + np.abs(hi))):
                break
        return 0.5 * (lo + hi)

    def barycenter(self, n: int = 64) -> float:
        xs, ws = np.polynomial.legendre.leggauss(n)
        ps = self.mid + self.hw * xs
        return float(np.sum(ws * ps * self.G(ps)) * self.hw)


@dataclass(frozen=True)
class MAProblem:
    """Rank-one coupled real MA problem on 𝔞⁺.

    full_line: 𝔞⁺ = R (horospherical); otherwise 𝔞⁺ = (−∞, 0].
    j(a) = w(a) + 2 r_Qu a − Σ_β log sinh(−2 b_β a); J = e^{−j}.
    """

    full_line: bool
    densities: tuple[Density, ...]
    r_qu: float
    betas: tuple[float, ...]
    twist_vertices: tuple[float, ...]
    two_rho: float
    orientation: int
    source: str = ""

    @property
    def k(self) -> int:
        return len(self.densities)

    def w(self, a):
        a = np.asarray(a, dtype=float)
        if not self.twist_vertices:
            return np.zeros_like(a)
        v = np.asarray(self.twist_vertices)[:, None] * a[None, :]
        m = v.max(axis=0)
        return m + np.log(np.exp(v - m).sum(axis=0))

    def dw(self, a):
        a = np.asarray(a, dtype=float)
        if not self.twist_vertices:
            return np.zeros_like(a)
        vs = np.asarray(self.twist_vertices)[:, None]
        v = vs * a[None, :]
        e = np.exp(v - v.max(axis=0))
        return (vs * e).sum(axis=0) / e.sum(axis=0)

    def j(self, a):
        a = np.asarray(a, dtype=float)
        out = self.w(a) + 2.0 * self.r_qu * a
        for b in self.betas:
            x = -2.0 * b * a
            # log sinh x = x + log1p(−e^{−2x}) − log 2, stable for large x
            out = out - (x + np.log1p(-np.exp(-2.0 * x)) - math.log(2.0))
        return out

    def dj(self, a):
        a = np.asarray(a, dtype=float)
        out = self.dw(a) + 2.0 * self.r_qu
        for b in self.betas:
            x = -2.0 * b * a
            out = out + 2.0 * b / np.tanh(x)
        return out

    def j_infinity_slope(self, ray: int) -> float:
        """Asymptotic slope of j along the ray ±1."""
        tw = 0.0
        if self.twist_vertices:
            tw = max(v * ray for v in self.twist_vertices)
        return tw + 2.0 * self.two_rho * ray

    def support(self, i: int, ray: int) -> float:
        d = self.densities[i]
        return max(d.pmin * ray, d.pmax * ray)

    def rays(self) -> tuple[int, ...]:
        return (-1, 1) if self.full_line else (-1,)

    def coercivity(self) -> float:
        """ε in j_∞ + Σ v_{Δ_i} ≥ ε|x| on the extreme rays."""
        return min(self.j_infinity_slope(r) + sum(self.support(i, r) for i in range(self.k)) for r in self.rays())

    def u_ref(self, i: int, a):
        d = self.densities[i]
        a = np.asarray(a, dtype=float)
        x = d.pmin * a
        y = d.pmax * a
        m = np.maximum(x, y)
        return m + np.log(np.exp(x - m) + np.exp(y - m))

    def du_ref(self, i: int, a):
        d = self.densities[i]
        a = np.asarray(a, dtype=float)
        s = 1.0 / (1.0 + np.exp(-(d.pmax - d.pmin) * a))
        return d.pmin + (d.pmax - d.pmin) * s


def _segment_param(d: HorosymmetricDatum, poly: Polytope):
    """Affine map c ↦ q(c) on a segment whose projection is nondegenerate."""
    if len(poly.vertices) != 2:
        raise MASolverError("rank-one classes must be segments")
    v0, v1 = poly.vertices
    c0, c1 = d.project(v0)[0], d.project(v1)[0]
    if c0 == c1:
        raise MASolverError("class segment projects to a point")
    slope = tuple((b - a) / (c1 - c0) for a, b in zip(v0, v1))
    offset = tuple(a - s * c0 for a, s in zip(v0, slope))
    return (min(c0, c1), max(c0, c1)), slope, offset


def _density_for_class(d: HorosymmetricDatum, poly: Polytope, weight: WeightSpec, orient: int) -> Density:
    (cmin, cmax), slope, offset = _segment_param(d, poly)
    n = d.ambient_rank
    dh = dh_polynomial(d).expanded
    base = dh * weight.polynomial_part(n)
    # q(c) with c = −orient·p/2
    images = [Poly.linear([s * Fraction(-orient, 2)], o) for s, o in zip(slope, offset)]
    g = base.substitute(images)
    coeffs = [float(c) for c in g.univariate_coeffs()] if not g.is_zero() else [0.0]
    lam = 0.0
    if weight.kind == "exp_affine" and not weight.exact:
        lam = float(sum(float(c) * s for c, s in zip(weight.coeffs, slope))) * (-orient / 2)
    ps = sorted((-2 * orient * float(cmin), -2 * orient * float(cmax)))
    dens = Density.build(ps[0], ps[1], coeffs, lam)
    _check_positive(dens)
    return dens


def _check_positive(dens: Density) -> None:
    xs = np.linspace(dens.pmin, dens.pmax, 1001)[1:-1]
    g = dens.G(xs)
    if np.any(g <= 0):
        raise AssumptionViolated("4", "density vanishes or is negative inside its interval")


def build_problem(d: HorosymmetricDatum, dec: Decomposition, source: str = "") -> MAProblem:
    if d.rank != 1:
        raise RankTooHigh(f"solver handles rank one; got rank {d.rank}")
    betas = [d.project(b)[0] for b in d.roots_s_plus]
    if betas and not (all(b > 0 for b in betas) or all(b < 0 for b in betas)):
        raise AssumptionViolated("1", "restricted roots do not define a half-line")
    orient = -1 if betas and betas[0] < 0 else 1
    r_qu = sum((d.project(a)[0] for a in d.roots_Qu), Fraction(0)) * orient
    _, rho = two_rho_H(d)
    dens = tuple(_density_for_class(d, c.moment_polytope, c.weight, orient) for c in dec.classes)
    twist = ()
    if dec.twist is not None:
        twist = tuple(sorted(float(-2 * orient * d.project(v)[0]) for v in dec.twist.vertices))
    prob = MAProblem(
        full_line=not betas,
        densities=dens,
        r_qu=float(r_qu),
        betas=tuple(float(b * orient) for b in betas),
        twist_vertices=twist,
        two_rho=float(rho[0] * orient),
        orientation=orient,
        source=source,
    )
    eps = prob.coercivity()
    if not eps > 0:
        raise AssumptionViolated("1", f"j_∞ + v_Δ is not coercive on the extreme rays (ε = {eps})")
    return prob
