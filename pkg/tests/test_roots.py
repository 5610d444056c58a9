import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from horoke import roots as up
from oracles import sympy_real_roots

F = Fraction


def test_isolation_matches_sympy_on_random_polynomials():
    rng = random.Random(5)
    for _ in range(40):
        coeffs = [F(rng.randint(-20, 20)) for _ in range(rng.randint(2, 7))]
        if coeffs[-1] == 0:
            coeffs[-1] = F(1)
        got = [float(r.refine(F(1, 10**12))) for r in up.isolate_real_roots(coeffs)]
        want = sympy_real_roots(list(reversed(coeffs)))
        want = sorted(set(round(w, 9) for w in want))
        assert [round(g, 9) for g in got] == want


def test_multiple_and_rational_roots():
    # (x - 1/2)^2 (x + 3)
    p = up.mul(up.mul([F(-1, 2), F(1)], [F(-1, 2), F(1)]), [F(3), F(1)])
    rs = up.isolate_real_roots(p)
    assert len(rs) == 2
    assert any(r.lo <= F(1, 2) <= r.hi for r in rs)
    assert up.count_roots(p, F(-10), F(10)) == 2


def test_interval_is_isolating_and_refines():
    p = [F(-2), F(0), F(1)]  # x^2 - 2
    for r in up.isolate_real_roots(p):
        r = r.refine(F(1, 10**20))
        assert r.hi - r.lo <= F(1, 10**20)
        assert up.evaluate(p, r.lo) * up.evaluate(p, r.hi) <= 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=2, max_size=8, unique=True))
def test_interpolation_reproduces_nodes(xs):
    ys = [x**3 - 2 * x + 1 for x in xs]
    p = up.interpolate(xs, ys)
    assert all(up.evaluate(p, x) == y for x, y in zip(xs, ys))
    if len(xs) >= 4:
        assert p == [F(1), F(-2), F(0), F(1)]


def test_primitive_integer_and_gcd():
    assert up.primitive_integer([F(1, 2), F(-3, 4)]) == [-2, 3]
    g = up.gcd_poly(up.mul([F(-1), F(1)], [F(2), F(1)]), up.mul([F(-1), F(1)], [F(5), F(1)]))
    assert up.monic(g) == [F(-1), F(1)]
