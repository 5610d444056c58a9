"""Existence criteria: general relint test, KE, Ricci bound, solitons, Mabuchi
metrics (affine and powers of affine), coupled searches, twisted toric KE.

All comparisons with 2ρ_H happen in ℳ-coordinates, after applying P to the
moment polytopes, barycenters and 2ρ_H. On exact data the decisions are exact;
with exponential weights they use certified intervals and widen to
"boundary" whenever an interval straddles a facet.
"""

from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import mpmath

from . import roots as up
from .geometry import (
    PolyCone,
    Polytope,
    contains_relint,
    minkowski_sum_all,
    sum_with_cone,
)
from .polynomial import Poly
from .quadrature import (
    DEFAULT_DPS,
    HighPrecisionScalar,
    WeightSpec,
    dh_barycenter,
    integrate_poly,
    integrate_poly_exp,
)
from .rational import Vector, dot, mat_vec, nullspace, primitive, rank, transpose, vec, zeros
from .rootdata import HorosymmetricDatum, dh_polynomial, positive_chamber, two_rho_H

EXISTS = "exists"
NOT_EXISTS = "not_exists"
BOUNDARY = "boundary"


class CriteriaError(Exception):
    pass


class InvalidDecomposition(CriteriaError):
    pass


class TargetOutsidePolytope(CriteriaError):
    pass


class NewtonStall(CriteriaError):
    pass


class RankTooHigh(CriteriaError):
    pass


class NotUnivariate(CriteriaError):
    pass


class EmptyWindow(CriteriaError):
    pass


@dataclass(frozen=True)
class ClassDatum:
    moment_polytope: Polytope
    weight: WeightSpec = field(default_factory=WeightSpec.constant)
    isotropy_character: Vector | None = None


@dataclass(frozen=True)
class Decomposition:
    classes: tuple[ClassDatum, ...]
    twist: Polytope | None = None

    @classmethod
    def single(cls, polytope: Polytope, weight: WeightSpec | None = None) -> "Decomposition":
        return cls((ClassDatum(polytope, weight or WeightSpec.constant()),))


@dataclass
class ExistenceReport:
    verdict: str
    certificate: dict
    numerics: dict = field(default_factory=dict)
    t: Fraction | None = None
    kind: str = ""

    @property
    def exists(self) -> bool:
        return self.verdict == EXISTS


# -- helpers ------------------------------------------------------------------------

def _proj_matrix(d: HorosymmetricDatum):
    return d.projection_P


def _projected(d: HorosymmetricDatum, p: Polytope) -> Polytope:
    return p.linear_image(d.projection_P)


def _bar_M(d: HorosymmetricDatum, poly: Polytope, weight: WeightSpec, tol=None):
    dh = dh_polynomial(d)
    b = dh_barycenter(poly, dh, weight, tol)
    if b.exact:
        return d.project(b.point), b
    with mpmath.workdps(DEFAULT_DPS):
        pt = tuple(
            sum((row_c * x for row_c, x in zip(row, b.point) if row_c != 0), HighPrecisionScalar.exact(0))
            for row in d.projection_P
        )
    return pt, b


def _dual_chamber(d: HorosymmetricDatum) -> PolyCone:
    return positive_chamber(d)[1]


def quotient_functionals(d: HorosymmetricDatum) -> list[Vector]:
    """Basis of functionals on ℳ⊗R vanishing on span((C̄⁺)^∨)."""
    dual = _dual_chamber(d)
    span = list(dual.generators) + list(dual.lineality)
    return nullspace(span, d.rank) if span else [tuple(Fraction(int(i == j)) for j in range(d.rank)) for i in range(d.rank)]


def _verdict_from_relint(res) -> str:
    if res.inside:
        return EXISTS
    return BOUNDARY if res.certificate.kind == "tight" else NOT_EXISTS


def _certificate_dict(res) -> dict:
    c = res.certificate
    out = {"kind": c.kind}
    if c.facet is not None:
        out["facet_normal"] = c.facet[0]
        out["facet_offset"] = c.facet[1]
    if c.epsilon is not None:
        out["epsilon"] = c.epsilon
    if c.slack is not None:
        out["slack"] = c.slack
    return out


def _interval_relint(s, x: Sequence[HighPrecisionScalar]) -> tuple[str, dict]:
    """Relint test for an uncertain point; three-valued."""
    uncertain = None
    for nv, c in s.equations:
        val = sum((HighPrecisionScalar.exact(a) * xi for a, xi in zip(nv, x) if a != 0), HighPrecisionScalar.exact(0)) - c
        sg = val.sign()
        if sg is not None:
            return NOT_EXISTS, {"kind": "off_hull", "facet_normal": nv, "facet_offset": c, "slack": val}
        uncertain = uncertain or {"kind": "uncertain_equation", "facet_normal": nv, "facet_offset": c, "slack": val}
    worst = None
    for nv, c in s.inequalities:
        val = HighPrecisionScalar.exact(c) - sum(
            (HighPrecisionScalar.exact(a) * xi for a, xi in zip(nv, x) if a != 0), HighPrecisionScalar.exact(0)
        )
        sg = val.sign()
        if sg == -1:
            return NOT_EXISTS, {"kind": "violated", "facet_normal": nv, "facet_offset": c, "slack": val}
        if sg is None:
            uncertain = uncertain or {"kind": "straddles", "facet_normal": nv, "facet_offset": c, "slack": val}
        elif worst is None or val.value < worst.value:
            worst = val
    if uncertain is not None:
        return BOUNDARY, uncertain
    return EXISTS, {"kind": "interior", "min_slack": worst}


def validate_decomposition(d: HorosymmetricDatum, dec: Decomposition, anticanonical: Polytope | None) -> None:
    n = d.ambient_rank
    if not dec.classes:
        raise InvalidDecomposition("at least one class is required")
    for c in dec.classes:
        if c.moment_polytope.dim_ambient != n:
            raise InvalidDecomposition("class polytope has wrong ambient dimension")
    if anticanonical is not None:
        parts = [c.moment_polytope for c in dec.classes]
        if dec.twist is not None:
            parts.append(dec.twist)
        if minkowski_sum_all(parts) != anticanonical:
            raise InvalidDecomposition("classes do not sum to the anticanonical polytope")
    chamber = positive_chamber(d)[0]
    for c in dec.classes:
        for v in c.moment_polytope.vertices:
            if not chamber.contains(d.project(v)):
                raise InvalidDecomposition("class polytope leaves the closed chamber")


# -- general criterion ----------------------------------------------------------------

def check_general(
    d: HorosymmetricDatum,
    dec: Decomposition,
    t=1,
    anticanonical: Polytope | None = None,
    tol: float | None = None,
) -> ExistenceReport:
    """0 ∈ Relint(t Σ bar_i + (1−t) Σ Δ⁺_i + Δ_γ − 2ρ_H − (C̄⁺)^∨) in ℳ⊗R."""
    t = Fraction(t)
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    validate_decomposition(d, dec, anticanonical)
    r = d.rank
    _, rho_M = two_rho_H(d)
    bars = [_bar_M(d, c.moment_polytope, c.weight, tol) for c in dec.classes]
    exact = all(b.exact for _, b in bars)
    parts = []
    if t != 1:
        parts += [_projected(d, c.moment_polytope).scale(1 - t) for c in dec.classes]
    if dec.twist is not None:
        parts.append(_projected(d, dec.twist))
    parts.append(Polytope.point(tuple(-x for x in rho_M)))
    q0 = minkowski_sum_all(parts)
    s = sum_with_cone(q0, _dual_chamber(d).negate())
    numerics = {"two_rho_H": rho_M, "barycenters": [bm for bm, _ in bars], "t": t}
    if exact:
        total = zeros(r)
        for bm, _ in bars:
            total = tuple(a + b for a, b in zip(total, bm))
        x = tuple(-t * a for a in total)
        res = contains_relint(s, x)
        return ExistenceReport(_verdict_from_relint(res), _certificate_dict(res), numerics, t, "general")
    with mpmath.workdps(DEFAULT_DPS):
        total = [HighPrecisionScalar.exact(0)] * r
        for bm, _ in bars:
            total = [a + (b if isinstance(b, HighPrecisionScalar) else HighPrecisionScalar.exact(b)) for a, b in zip(total, bm)]
        x = [a * (-t) for a in total]
        verdict, cert = _interval_relint(s, x)
    return ExistenceReport(verdict, cert, numerics, t, "general")


def check_ke(d: HorosymmetricDatum, ac: Polytope) -> ExistenceReport:
    rep = check_general(d, Decomposition.single(ac), 1)
    rep.kind = "ke"
    return rep


# -- greatest Ricci lower bound ------------------------------------------------------

@dataclass
class RicciBound:
    value: Fraction
    flag: str  # "ke", "boundary", "exit"
    facet: tuple | None
    barycenter: Vector
    two_rho_H: Vector


def greatest_ricci_lower_bound(d: HorosymmetricDatum, ac: Polytope) -> RicciBound:
    """Exit parameter of the ray 2ρ_H + s(2ρ_H − bar) from Relint(Δ − (C̄⁺)^∨)."""
    bar, _ = _bar_M(d, ac, WeightSpec.constant())
    _, rho = two_rho_H(d)
    region = sum_with_cone(_projected(d, ac), _dual_chamber(d).negate())
    direction = tuple(a - b for a, b in zip(rho, bar))
    if not contains_relint(region, rho).inside:
        raise CriteriaError("2ρ_H is not in the relative interior of the anticanonical region")
    for nv, c in region.equations:
        if dot(nv, direction) != 0:
            return RicciBound(Fraction(0), "exit", (nv, c), bar, rho)
    s_max = None
    facet = None
    for nv, c in region.inequalities:
        rate = dot(nv, direction)
        if rate > 0:
            s = (c - dot(nv, rho)) / rate
            if s_max is None or s < s_max:
                s_max, facet = s, (nv, c)
    if s_max is None:
        ke = check_ke(d, ac)
        return RicciBound(Fraction(1), "ke" if ke.exists else "boundary", None, bar, rho)
    return RicciBound(s_max / (1 + s_max), "exit", facet, bar, rho)


def ray_point(d: HorosymmetricDatum, ac: Polytope, t: Fraction) -> tuple[Vector, object]:
    """Point 2ρ_H + (t/(1−t))(2ρ_H − bar) and the region, for bisection checks."""
    bar, _ = _bar_M(d, ac, WeightSpec.constant())
    _, rho = two_rho_H(d)
    region = sum_with_cone(_projected(d, ac), _dual_chamber(d).negate())
    s = t / (1 - t)
    return tuple(a + s * (a - b) for a, b in zip(rho, bar)), region


# -- solitons ---------------------------------------------------------------------------

def _ambient_functional(d: HorosymmetricDatum, phi: Sequence) -> tuple:
    """Ambient covector of q ↦ <phi, P q>."""
    return tuple(sum((p * row[k] for p, row in zip(phi, d.projection_P)), Fraction(0)) for k in range(d.ambient_rank))


@dataclass
class SolitonSolution:
    xi: tuple  # coefficients on the soliton directions
    ambient: tuple  # ambient covector of the exponent
    gradient_norm: float
    iterations: int
    decrements: list


def _soliton_newton(d, ac, directions, target, tol, max_iter=200):
    dh = dh_polynomial(d).expanded
    n = d.ambient_rank
    funcs = [_ambient_functional(d, s) for s in directions]
    lin = [Poly.linear(f) for f in funcs]
    m = len(funcs)

    def moments(theta):
        cov = tuple(sum((th * f[k] for th, f in zip(theta, funcs)), mpmath.mpf(0)) for k in range(n))
        z = integrate_poly_exp(ac, dh, cov, 0, tol)
        first = [integrate_poly_exp(ac, dh * l, cov, 0, tol) for l in lin]
        second = [[integrate_poly_exp(ac, dh * lin[i] * lin[j], cov, 0, tol) for j in range(m)] for i in range(m)]
        return z, first, second, cov

    def objective(theta):
        cov = tuple(sum((th * f[k] for th, f in zip(theta, funcs)), mpmath.mpf(0)) for k in range(n))
        z = integrate_poly_exp(ac, dh, cov, 0, tol)
        return mpmath.log(z.value) - mpmath.fsum(th * tg for th, tg in zip(theta, target))

    with mpmath.workdps(DEFAULT_DPS):
        theta = [mpmath.mpf(0)] * m
        target_mp = [mpmath.mpf(x.numerator) / x.denominator for x in target]
        decrements = []
        for it in range(max_iter + 1):
            z, first, second, cov = moments(theta)
            mean = [f.value / z.value for f in first]
            grad = [mu - tg for mu, tg in zip(mean, target_mp)]
            gnorm = max(abs(g) for g in grad)
            if gnorm <= mpmath.mpf("1e-14"):
                return SolitonSolution(tuple(theta), cov, float(gnorm), it, decrements)
            if it == max_iter:
                break
            hess = mpmath.matrix(m, m)
            for i in range(m):
                for j in range(m):
                    hess[i, j] = second[i][j].value / z.value - mean[i] * mean[j]
            step = mpmath.lu_solve(hess, mpmath.matrix([-g for g in grad]))
            dec = -mpmath.fsum(g * step[i] for i, g in enumerate(grad))
            decrements.append(float(dec))
            f0 = objective(theta)
            alpha = mpmath.mpf(1)
            for _ in range(60):
                trial = [th + alpha * step[i] for i, th in enumerate(theta)]
                if objective(trial) <= f0 - mpmath.mpf("1e-4") * alpha * dec:
                    break
                alpha /= 2
            else:
                raise NewtonStall(f"line search failed at iteration {it}")
            theta = trial
    raise NewtonStall(f"no convergence after {max_iter} iterations (|grad| = {float(gnorm):.3e})")


def solve_soliton(d: HorosymmetricDatum, ac: Polytope, tol: float | None = None) -> ExistenceReport:
    """Find ξ in the soliton directions making the exp-weighted barycenter hit 2ρ_H."""
    directions = list(d.soliton_directions)
    if not directions:
        rep = check_ke(d, ac)
        rep.kind = "soliton"
        return rep
    if rank(directions, d.rank) != len(directions):
        raise CriteriaError("soliton directions are not independent")
    _, rho = two_rho_H(d)
    target = tuple(dot(s, rho) for s in directions)
    image = ac.linear_image([_ambient_functional(d, s) for s in directions])
    inside = contains_relint(image, target)
    if not inside.inside:
        raise TargetOutsidePolytope(f"target {target} is not in the relative interior of the projected polytope")
    sol = _soliton_newton(d, ac, directions, target, tol)
    weight = WeightSpec.exp_affine(sol.ambient)
    numerics = {
        "xi": sol.xi,
        "exponent": sol.ambient,
        "gradient_norm": sol.gradient_norm,
        "iterations": sol.iterations,
        "target": target,
    }
    dual = _dual_chamber(d)
    if all(x == 0 for x in sol.xi):
        bar, _ = _bar_M(d, ac, WeightSpec.constant())
        res = contains_relint(dual, tuple(a - b for a, b in zip(bar, rho)))
        numerics["barycenter"] = bar
        cert = _certificate_dict(res)
        cert["solved"] = "xi = 0"
        return ExistenceReport(_verdict_from_relint(res), cert, numerics, Fraction(1), "soliton")
    bar, _ = _bar_M(d, ac, weight, tol)
    numerics["barycenter"] = bar
    with mpmath.workdps(DEFAULT_DPS):
        slack = mpmath.mpf(sol.gradient_norm) * 1000
        x = [b - HighPrecisionScalar.exact(r) for b, r in zip(bar, rho)]
        x = [HighPrecisionScalar(v.value, v.error + slack) for v in x]
        span_dirs = list(directions)
        eqs = []
        for e in dual.equations:
            if rank(span_dirs + [e], d.rank) == len(span_dirs):
                continue  # enforced by the Newton solve
            eqs.append((e, Fraction(0)))

        class _S:
            equations = eqs
            inequalities = [(nv, Fraction(0)) for nv in dual.inequalities]

        verdict, cert = _interval_relint(_S, x)
    cert["solved"] = "newton"
    cert["gradient_norm"] = sol.gradient_norm
    return ExistenceReport(verdict, cert, numerics, Fraction(1), "soliton")


# -- Mabuchi ------------------------------------------------------------------------------

def _chart_functionals(d: HorosymmetricDatum) -> list[Poly]:
    """Polynomials q ↦ <c_j, P(q − o)> for the central directions."""
    out = []
    shift = d.project(d.chart_origin)
    for c in d.central_directions:
        cov = _ambient_functional(d, c)
        out.append(Poly.linear(cov, -dot(c, shift)))
    return out


def _moment_rows(d: HorosymmetricDatum, ac: Polytope, basis_polys: Sequence[Poly]) -> list[list[Fraction]]:
    """Rows ∫ φ(Pq − Pρ)·g(q)·P_DH(q) dq for quotient functionals φ, basis g."""
    dh = dh_polynomial(d).expanded
    _, rho = two_rho_H(d)
    rows = []
    for phi in quotient_functionals(d):
        lin = Poly.linear(_ambient_functional(d, phi), -dot(phi, rho))
        rows.append([integrate_poly(ac, lin * g * dh) for g in basis_polys])
    return rows


def _affine_weight(d: HorosymmetricDatum, a: Sequence[Fraction], b: Fraction, power: int = 1) -> WeightSpec:
    cov = zeros(d.ambient_rank)
    const = b
    for aj, pj in zip(a, _chart_functionals(d)):
        for e, c in pj.terms.items():
            if sum(e) == 0:
                const += aj * c
            else:
                k = e.index(1)
                cov = tuple(x + (aj * c if i == k else 0) for i, x in enumerate(cov))
    if power == 1:
        return WeightSpec.affine(cov, const)
    return WeightSpec.power_affine(cov, const, power)


def _vertex_signs(weight: WeightSpec, ac: Polytope):
    vals = [(v, weight.affine_value(v)) for v in ac.vertices]
    return vals


def solve_mabuchi(d: HorosymmetricDatum, ac: Polytope, force_constant: bool = False) -> ExistenceReport:
    """Affine ℓ = Σ a_j c_j + b with proj(bar_ℓ) = proj(2ρ_H), then positivity and cone checks."""
    n = d.ambient_rank
    charts = [] if force_constant else _chart_functionals(d)
    basis = charts + [Poly.const(n, 1)]
    rows = _moment_rows(d, ac, basis)
    relations = [tuple(int(x) for x in primitive(r)) for r in rows if any(x != 0 for x in r)]
    null = nullspace(rows, len(basis)) if rows else [tuple(Fraction(int(i == j)) for j in range(len(basis))) for i in range(len(basis))]
    numerics = {"relations": relations}
    if not null:
        return ExistenceReport(NOT_EXISTS, {"kind": "no_solution", "relations": relations}, numerics, Fraction(1), "mabuchi")
    const_vec = tuple(Fraction(int(i == len(basis) - 1)) for i in range(len(basis)))
    if len(null) > 1 and rank(null + [const_vec], len(basis)) == len(null):
        sol = const_vec
    else:
        sol = null[0]
    weight = _affine_weight(d, sol[:-1], sol[-1])
    dh = dh_polynomial(d).expanded
    mass_l = integrate_poly(ac, dh * weight.polynomial_part(n))
    if mass_l == 0:
        return ExistenceReport(NOT_EXISTS, {"kind": "sign_change", "reason": "zero weighted mass"}, numerics, Fraction(1), "mabuchi")
    mass = integrate_poly(ac, dh)
    sol = tuple(x * mass / mass_l for x in sol)
    weight = _affine_weight(d, sol[:-1], sol[-1])
    numerics["solution"] = sol
    vals = _vertex_signs(weight, ac)
    numerics["vertex_values"] = [val for _, val in vals]
    neg = [(v, val) for v, val in vals if val < 0]
    if neg:
        v, val = neg[0]
        return ExistenceReport(NOT_EXISTS, {"kind": "sign_change", "vertex": v, "value": val}, numerics, Fraction(1), "mabuchi")
    zero = [(v, val) for v, val in vals if val == 0]
    if zero:
        return ExistenceReport(BOUNDARY, {"kind": "vanishes_at_vertex", "vertex": zero[0][0]}, numerics, Fraction(1), "mabuchi")
    bar, _ = _bar_M(d, ac, weight)
    _, rho = two_rho_H(d)
    numerics["barycenter"] = bar
    res = contains_relint(_dual_chamber(d), tuple(a - b for a, b in zip(bar, rho)))
    cert = _certificate_dict(res)
    cert["solution"] = sol
    return ExistenceReport(_verdict_from_relint(res), cert, numerics, Fraction(1), "mabuchi")


@dataclass
class PowerRoot:
    ratio: up.RealRoot  # a/b, or None for the root at infinity (b = 0)
    at_infinity: bool
    admissible: bool
    sign: int
    verdict: str


def _affine_sign_on_vertices(values_at: Callable[[Fraction], list[Fraction]], root: up.RealRoot):
    """Certified common sign of ℓ_r at all vertices for r in the root interval."""
    cur = root
    for _ in range(200):
        lo_vals = values_at(cur.lo)
        hi_vals = values_at(cur.hi)
        signs = set()
        undecided = False
        for a, b in zip(lo_vals, hi_vals):
            if a > 0 and b > 0:
                signs.add(1)
            elif a < 0 and b < 0:
                signs.add(-1)
            else:
                undecided = True
        if len(signs) == 2:
            return 0, cur
        if not undecided:
            return signs.pop(), cur
        if cur.exact:
            vals = values_at(cur.lo)
            if any(v == 0 for v in vals):
                return None, cur
        cur = cur.refine((cur.hi - cur.lo) / 4)
    return None, cur


def _cone_inequalities(dual: PolyCone, x: Vector, margin: Fraction = Fraction(1, 10**9)) -> str:
    """Strict inequalities of the dual chamber at an approximate root.

    The equations of its span are the ones the root equation enforces, so
    only the inequalities are tested; slacks within the margin are undecided.
    """
    verdict = EXISTS
    for nv in dual.inequalities:
        val = -dot(nv, x)
        if val < -margin:
            return NOT_EXISTS
        if val <= margin:
            verdict = BOUNDARY
    return verdict


def solve_power_mabuchi(d: HorosymmetricDatum, ac: Polytope, k: int) -> ExistenceReport:
    """Weights (a c + b)^k: homogeneous degree-k equation in (a, b)."""
    if k < 1:
        raise ValueError("k must be positive")
    if len(d.central_directions) != 1:
        raise RankTooHigh("power-Mabuchi search needs exactly one central direction")
    n = d.ambient_rank
    c = _chart_functionals(d)[0]
    # (a c + b)^k = Σ_j binom(k, j) a^j b^(k−j) c^j
    from math import comb

    basis = [c**j * comb(k, j) for j in range(k + 1)]
    rows = _moment_rows(d, ac, basis)
    rows = [r for r in rows if any(x != 0 for x in r)]
    numerics: dict = {"k": k}
    if not rows:
        poly = []
    else:
        poly = list(rows[0])
        for r in rows[1:]:
            poly = up.gcd_poly(poly, r)
    coeffs = up.primitive_integer(poly)
    numerics["equation_ab"] = tuple(reversed(coeffs)) if coeffs else ()
    # coefficients listed from a^k down to b^k
    chart_vals = [c(v) for v in ac.vertices]
    results = []
    for rt in up.isolate_real_roots(poly, Fraction(1, 10**15)):
        sign, rt2 = _affine_sign_on_vertices(lambda r: [r * cv + 1 for cv in chart_vals], rt)
        admissible = sign in (1, -1)
        results.append(PowerRoot(rt2, False, admissible, sign or 0, ""))
    deg = up.degree(poly)
    if poly and deg < k:
        vals = chart_vals
        sign = 1 if all(v > 0 for v in vals) else (-1 if all(v < 0 for v in vals) else 0)
        results.append(PowerRoot(None, True, sign != 0, sign, ""))
    _, rho = two_rho_H(d)
    dual = _dual_chamber(d)
    best = None
    for pr in results:
        if not pr.admissible:
            pr.verdict = NOT_EXISTS
            continue
        if pr.at_infinity:
            a, b = Fraction(pr.sign), Fraction(0)
        else:
            r = pr.ratio.midpoint
            a, b = r * pr.sign, Fraction(pr.sign)
        weight = _affine_weight(d, (a,), b, k) if k > 1 else _affine_weight(d, (a,), b)
        bar, _ = _bar_M(d, ac, weight)
        pr.verdict = _cone_inequalities(dual, tuple(x - y for x, y in zip(bar, rho)))
        if pr.verdict == EXISTS and best is None:
            best = pr
    numerics["roots"] = results
    if best is not None:
        return ExistenceReport(EXISTS, {"kind": "admissible_root", "root": best}, numerics, Fraction(1), f"power_mabuchi_{k}")
    return ExistenceReport(NOT_EXISTS, {"kind": "no_admissible_root"}, numerics, Fraction(1), f"power_mabuchi_{k}")


# -- coupled searches ----------------------------------------------------------------------

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


def eval_expression(text: str, env: Mapping[str, Fraction]) -> Fraction:
    """Exact value of an arithmetic expression over named rationals."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise KeyError(f"unknown parameter {node.id!r}")
            return Fraction(env[node.id])
        raise ValueError(f"unsupported expression element in {text!r}")

    return walk(ast.parse(text, mode="eval"))


@dataclass(frozen=True)
class Family:
    """One-parameter family of decompositions with vertex expressions."""

    parameters: tuple[str, ...]
    classes: tuple[tuple[tuple[str, ...], ...], ...]  # per class: vertex expression rows
    window: tuple[str, str]
    free: str
    fixed: tuple[tuple[str, Fraction], ...]

    def with_values(self, free: str, fixed: Mapping[str, Fraction]) -> "Family":
        if free not in self.parameters:
            raise NotUnivariate(f"{free!r} is not a family parameter")
        vals = dict(fixed)
        missing = [p for p in self.parameters if p != free and p not in vals]
        if missing:
            raise NotUnivariate(f"parameters left free: {missing}")
        extra = [p for p in vals if p not in self.parameters or p == free]
        if extra:
            raise NotUnivariate(f"cannot fix {extra}")
        return Family(self.parameters, self.classes, self.window, free, tuple(sorted(vals.items())))

    def env(self, value: Fraction) -> dict:
        env = dict(self.fixed)
        env[self.free] = Fraction(value)
        return env

    def bounds(self) -> tuple[Fraction, Fraction]:
        env = dict(self.fixed)
        env[self.free] = Fraction(0)
        return eval_expression(self.window[0], env), eval_expression(self.window[1], env)

    def decomposition(self, value: Fraction) -> Decomposition:
        env = self.env(value)
        classes = []
        for rows in self.classes:
            verts = [tuple(eval_expression(x, env) for x in row) for row in rows]
            classes.append(ClassDatum(Polytope.from_vertices(verts)))
        return Decomposition(tuple(classes))


@dataclass
class CoupledRoot:
    root: up.RealRoot
    in_window: bool
    dh_positive: bool
    admissible: bool


@dataclass
class CoupledResult:
    polynomial: tuple[int, ...]  # integer coefficients, highest degree first
    roots: list[CoupledRoot]
    window: tuple[Fraction, Fraction]
    report: ExistenceReport


def _interpolate_function(f: Callable[[Fraction], Fraction], nodes: Sequence[Fraction], max_degree: int):
    xs, ys = [], []
    cache = {}

    def val(x):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    for k in range(1, max_degree + 2):
        xs = list(nodes[:k])
        ys = [val(x) for x in xs]
        p = up.interpolate(xs, ys)
        checks = nodes[k : k + 3]
        if all(up.evaluate(p, x) == val(x) for x in checks):
            return p
    raise NotUnivariate("moments are not polynomial in the free parameter (degree cap reached)")


def coupled_search(d: HorosymmetricDatum, family: Family, max_degree: int = 30) -> CoupledResult:
    lo, hi = family.bounds()
    if not lo < hi:
        raise EmptyWindow(f"empty window ({lo}, {hi})")
    dh = dh_polynomial(d).expanded
    _, rho = two_rho_H(d)
    funcs = quotient_functionals(d)
    dual = _dual_chamber(d)
    lins = [Poly.linear(_ambient_functional(d, phi)) for phi in funcs]
    targets = [dot(phi, rho) for phi in funcs]
    span = hi - lo
    count = max_degree + 6
    nodes = [lo + span * Fraction(j + 1, count + 1) for j in range(count)]

    def class_moments(value):
        dec = family.decomposition(value)
        out = []
        for c in dec.classes:
            m = integrate_poly(c.moment_polytope, dh)
            firsts = [integrate_poly(c.moment_polytope, dh * l) for l in lins]
            out.append((m, firsts))
        return out

    cache = {}

    def moments(value):
        if value not in cache:
            cache[value] = class_moments(value)
        return cache[value]

    def component(j):
        def f(value):
            ms = moments(value)
            total = Fraction(0)
            for i, (_, firsts) in enumerate(ms):
                term = firsts[j]
                for k, (mk, _) in enumerate(ms):
                    if k != i:
                        term *= mk
                total += term
            prod = Fraction(1)
            for mk, _ in ms:
                prod *= mk
            return total - targets[j] * prod

        return f

    def denominator(value):
        out = Fraction(1)
        for mk, _ in moments(value):
            out *= mk
        return out

    poly: list[Fraction] = []
    for j in range(len(funcs)):
        pj = _interpolate_function(component(j), nodes, max_degree)
        poly = pj if not poly else up.gcd_poly(poly, pj)
    den = _interpolate_function(denominator, nodes, max_degree)
    coeffs = up.primitive_integer(poly)
    roots: list[CoupledRoot] = []
    for rt in up.isolate_real_roots(poly):
        rt = rt.refine(Fraction(1, 10**13))
        while not rt.exact and (rt.lo < lo < rt.hi or rt.lo < hi < rt.hi):
            rt = rt.refine((rt.hi - rt.lo) / 4)
        in_window = lo < rt.lo and rt.hi < hi if not rt.exact else lo < rt.lo < hi
        if up.evaluate(den, rt.midpoint) == 0 or (rt.exact and up.evaluate(den, rt.lo) == 0):
            in_window = False
        dh_ok = False
        if in_window:
            dec = family.decomposition(rt.midpoint)
            dh_ok = all(
                all(f(v) >= 0 for f in dh_polynomial(d).factors for v in c.moment_polytope.vertices)
                for c in dec.classes
            )
        admissible = in_window
        if in_window and dual.inequalities:
            total = zeros(d.rank)
            for c in dec.classes:
                bm, _ = _bar_M(d, c.moment_polytope, c.weight)
                total = tuple(a + b for a, b in zip(total, bm))
            admissible = _cone_inequalities(dual, tuple(a - b for a, b in zip(total, rho))) == EXISTS
        roots.append(CoupledRoot(rt, in_window, dh_ok, admissible))
    admissible = [r for r in roots if r.admissible]
    numerics = {"polynomial": tuple(reversed(coeffs)), "window": (lo, hi)}
    if admissible:
        rep = ExistenceReport(EXISTS, {"kind": "polynomial_root", "root": admissible[0].root}, numerics, Fraction(1), "coupled")
    else:
        rep = ExistenceReport(NOT_EXISTS, {"kind": "no_root_in_window"}, numerics, Fraction(1), "coupled")
    return CoupledResult(tuple(reversed(coeffs)), roots, (lo, hi), rep)


# -- twisted toric KE --------------------------------------------------------------------------

def check_twisted_ke_toric(bar: Sequence, twist: Polytope) -> ExistenceReport:
    """0 ∈ Relint(bar + Δ_γ); a point twist is reported as boundary when it matches."""
    bar = vec(bar)
    res = contains_relint(twist, tuple(-x for x in bar))
    cert = _certificate_dict(res)
    verdict = _verdict_from_relint(res)
    if res.inside and twist.dim_affine == 0:
        verdict = BOUNDARY
        cert["kind"] = "degenerate_point"
    return ExistenceReport(verdict, cert, {"barycenter": bar}, Fraction(1), "twisted_toric")
