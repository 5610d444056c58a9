import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from horoke.geometry import Polytope
from horoke.polynomial import Poly
from horoke.quadrature import (
    HighPrecisionScalar,
    NonpositiveWeight,
    WeightSpec,
    dh_barycenter,
    exp_divided_difference,
    integrate_poly,
    integrate_poly_exp,
)
from oracles import gauss_legendre_segment, gauss_triangle, sympy_exp_segment

F = Fraction


def _random_poly(rng: random.Random, n: int, degree: int) -> Poly:
    terms = {}
    for _ in range(rng.randint(1, 5)):
        e = [0] * n
        for _ in range(rng.randint(0, degree)):
            e[rng.randrange(n)] += 1
        terms[tuple(e)] = F(rng.randint(-5, 5), rng.randint(1, 3))
    return Poly(n, terms)


def _random_polytope(rng: random.Random, n: int) -> Polytope:
    while True:
        pts = [tuple(F(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(n)) for _ in range(n + 3)]
        p = Polytope.from_vertices(pts)
        if p.dim_affine == n:
            return p


def _vector_eval(f: Poly, x: np.ndarray) -> np.ndarray:
    out = np.zeros(len(x))
    for e, c in f.terms.items():
        out += float(c) * np.prod(x ** np.array(e), axis=1)
    return out


def _monte_carlo(p: Polytope, f: Poly, samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Rejection sampling in the bounding box; independent of any triangulation."""
    verts = np.array([[float(c) for c in v] for v in p.vertices])
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    x = lo + (hi - lo) * rng.random((samples, len(lo)))
    inside = np.ones(samples, dtype=bool)
    for nv, c in p.inequalities:
        inside &= x @ np.array([float(a) for a in nv]) <= float(c)
    vals = np.where(inside, _vector_eval(f, x), 0.0) * np.prod(hi - lo)
    return vals.mean(), vals.std(ddof=1) / np.sqrt(samples)


def test_exact_integrals_match_monte_carlo_within_three_sigma():
    rng = random.Random(42)
    nrng = np.random.default_rng(42)
    for case in range(50):
        n = 2 + case % 2
        p = _random_polytope(rng, n)
        f = _random_poly(rng, n, 3)
        exact = float(integrate_poly(p, f))
        est, sigma = _monte_carlo(p, f, 40000, nrng)
        assert abs(exact - est) <= 3 * sigma + 1e-12, (case, exact, est, sigma)


def test_triangulation_strategies_agree_exactly():
    rng = random.Random(1)
    for _ in range(10):
        p = _random_polytope(rng, 3)
        f = _random_poly(rng, 3, 3)
        assert integrate_poly(p, f, "pulling") == integrate_poly(p, f, "fan")


def test_simplex_monomials_have_dirichlet_values():
    tri = Polytope.from_vertices([(0, 0), (1, 0), (0, 1)])
    x = Poly.var(2, 0)
    y = Poly.var(2, 1)
    # ∫ x^a y^b over the unit simplex = a! b! / (a + b + 2)!
    assert integrate_poly(tri, x**2 * y) == F(2 * 1, 120)
    assert integrate_poly(tri, Poly.const(2, 1)) == F(1, 2)


def _mp_eval(f: Poly, point) -> mpmath.mpf:
    total = mpmath.mpf(0)
    for e, c in f.terms.items():
        m = mpmath.mpf(c.numerator) / c.denominator
        for x, k in zip(point, e):
            m *= x**k
        total += m
    return total


def test_exp_affine_segment_matches_gauss_legendre():
    rng = random.Random(9)
    for _ in range(10):
        a, b = sorted(F(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(2))
        if a == b:
            continue
        xi = F(rng.randint(-20, 20), rng.randint(1, 4))
        f = _random_poly(rng, 1, 4)
        seg = Polytope.segment((a,), (b,))
        got = integrate_poly_exp(seg, f, (xi,), 0, 1e-30)
        fn = lambda t: _mp_eval(f, (t,)) * mpmath.exp(mpmath.mpf(xi.numerator) / xi.denominator * t)  # noqa: E731
        want = gauss_legendre_segment(fn, mpmath.mpf(a.numerator) / a.denominator, mpmath.mpf(b.numerator) / b.denominator)
        assert abs(got.value - want) <= 1e-12 * max(1, abs(want))
        exact = sympy_exp_segment([(e[0], c) for e, c in f.terms.items()], xi, a, b)
        assert abs(got.value - exact) <= got.error


def test_exp_affine_triangle_matches_gauss_rule():
    rng = random.Random(10)
    for _ in range(6):
        verts = [(F(0), F(0)), (F(rng.randint(1, 4)), F(0)), (F(rng.randint(-2, 2)), F(rng.randint(1, 4)))]
        tri = Polytope.from_vertices(verts)
        xi = (F(rng.randint(-6, 6), 2), F(rng.randint(-6, 6), 3))
        f = _random_poly(rng, 2, 3)
        got = integrate_poly_exp(tri, f, xi, F(1, 3), 1e-30)
        x0, x1 = (mpmath.mpf(c.numerator) / c.denominator for c in xi)
        fn = lambda x, y: _mp_eval(f, (x, y)) * mpmath.exp(x0 * x + x1 * y + mpmath.mpf(1) / 3)  # noqa: E731
        want = gauss_triangle(fn, verts)
        assert abs(got.value - want) <= 1e-12 * max(1, abs(want))


def test_exp_with_zero_exponent_is_exact():
    seg = Polytope.segment((0,), (2,))
    assert integrate_poly_exp(seg, Poly.var(1, 0), (0,)) == F(2)


def test_divided_difference_certified_bound():
    with mpmath.workdps(50):
        nodes = [F(0), F(1, 3), F(1, 3), F(2)]
        dd = exp_divided_difference(nodes, 1e-40)
        # exp[0, 1/3, 1/3, 2] via mpmath's own divided differences
        z = [mpmath.mpf(0), mpmath.mpf(1) / 3, mpmath.mpf(1) / 3 + mpmath.mpf("1e-20"), mpmath.mpf(2)]
        ref = mpmath.mpf(0)
        for i, zi in enumerate(z):
            den = mpmath.mpf(1)
            for j, zj in enumerate(z):
                if i != j:
                    den *= zi - zj
            ref += mpmath.exp(zi) / den
        assert abs(dd.value - ref) < mpmath.mpf("1e-15")


def test_high_precision_scalar_intervals_enclose():
    with mpmath.workdps(40):
        a = HighPrecisionScalar.exact(F(1, 3))
        b = HighPrecisionScalar.exact(F(2, 7))
        c = (a * b - a) / (b + 1)
        truth = (F(1, 3) * F(2, 7) - F(1, 3)) / (F(2, 7) + 1)
        t = mpmath.mpf(truth.numerator) / truth.denominator
        assert c.lo <= t <= c.hi
        assert c.sign() == -1


def test_barycenter_translation_and_scaling_are_exact():
    rng = random.Random(4)
    for _ in range(8):
        p = _random_polytope(rng, 2)
        dh = Poly.linear((1, 2), 20)
        base = dh_barycenter(p, dh).point
        v = (F(rng.randint(-3, 3), 2), F(rng.randint(-3, 3), 5))
        moved = dh.affine_pullback([[1, 0], [0, 1]], [-x for x in v])
        assert dh_barycenter(p.translate(v), moved).point == tuple(a + b for a, b in zip(base, v))
        c = F(rng.randint(1, 5), rng.randint(1, 3))
        scaled = dh.affine_pullback([[1 / c, 0], [0, 1 / c]], [0, 0])
        assert dh_barycenter(p.scale(c), scaled).point == tuple(c * a for a in base)


def test_barycenter_with_affine_weight_is_ratio_of_moments():
    seg = Polytope.segment((1,), (3,))
    t = Poly.var(1, 0)
    w = WeightSpec.affine((2,), 1)
    got = dh_barycenter(seg, t, w).point[0]
    assert got == integrate_poly(seg, t * t * (2 * t + 1)) / integrate_poly(seg, t * (2 * t + 1))


def test_nonpositive_affine_weight_rejected():
    seg = Polytope.segment((0,), (2,))
    with pytest.raises(NonpositiveWeight):
        dh_barycenter(seg, Poly.const(1, 1), WeightSpec.affine((-1,), 1))
