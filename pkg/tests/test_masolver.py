import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from horoke import catalog, criteria
from horoke.masolver import (
    DivergenceDiagnosis,
    NonConvexInput,
    RankTooHigh,
    SolverConfig,
    build_problem,
    legendre,
    slope_barycenters,
    solve_at_t,
    stokes_residual,
    to_csv,
)
from horoke.masolver import _fallback, kernels
from horoke.masolver import solver as S

try:
    from horoke.masolver import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def problem(ident, weight=None):
    e = catalog.get(ident)
    return build_problem(e.datum, criteria.Decomposition.single(e.anticanonical_polytope, weight), ident)


def test_jacobian_matches_finite_differences():
    p = problem("F3_2.36")
    g = S.Grid(-10.0, 10.0, 40)
    u, shift, _ = S._initial(p, g)
    t = 0.3
    u = u + 0.01 * np.sin(g.nodes)[None, :]
    base = g.base_index()

    def F(v):
        f, _, _ = S._residual(p, g, v, t, shift)
        return S._flatten(S._normalize_rows(f, v, base))

    _, R, gg = S._residual(p, g, u, t, shift)
    k, n = u.shape
    A = S._banded_to_sparse(S._jacobian(p, g, u, t, R, gg, base), k, k * n).toarray()
    J = np.zeros_like(A)
    eps = 1e-6
    for c in range(k * n):
        d = np.zeros(k * n)
        d[c] = eps
        J[:, c] = (F(u + S._unflatten(d, k, n)) - F(u - S._unflatten(d, k, n))) / (2 * eps)
    assert np.abs(A - J).max() <= 1e-6 * np.abs(J).max()


def test_initial_point_solves_t_zero():
    p = problem("F3_3.31")
    g = S.Grid(-30.0, 30.0, 600)
    u, shift, _ = S._initial(p, g)
    f, _, _ = S._residual(p, g, u, 0.0, shift)
    assert np.abs(S._normalize_rows(f, u, g.base_index())).max() < 1e-12


@pytest.mark.parametrize("t", [0.25, 0.5])
def test_converged_solution_properties(t):
    sol = solve_at_t(problem("F3_2.36"), t, SolverConfig(n=1500))
    assert not isinstance(sol, DivergenceDiagnosis)
    d = sol.diagnostics
    assert d["residual_inf"] <= 1e-11
    assert abs(d["mass"] - 1) < 1e-10
    assert d["min_second_difference"] >= -1e-10  # convex up to round-off
    assert abs(d["stokes_residual"]) <= 5e-5
    slopes = sol.slopes()[0]
    assert np.all(np.diff(slopes) >= -1e-9)


def test_flux_form_stokes_identity_is_exact():
    # replacing ∫ du e^{−ν} by the exact barycenter of G leaves only round-off
    p = problem("F3_2.36")
    bars = [d.barycenter() for d in p.densities]
    for n in (1500, 3000):
        t = 0.5
        sol = solve_at_t(p, t, SolverConfig(n=n))
        a, h = sol.grid.nodes, sol.grid.h
        w = np.exp(-sol.nu())
        dref = sum(p.du_ref(i, a) for i in range(p.k))
        total = t * sum(bars) + (1 - t) * h * np.sum(dref * w) + h * np.sum(p.dj(a) * w)
        assert abs(total) <= 1e-13 * max(1.0, abs(sum(bars)))


def test_slope_barycenters_approach_density_barycenters():
    p = problem("F3_2.36")
    sol = solve_at_t(p, 0.5, SolverConfig(n=3000))
    got = slope_barycenters(sol)
    want = np.array([d.barycenter() for d in p.densities])
    assert np.abs(got - want).max() < 1e-3


def test_ke_entry_converges_at_t_one():
    sol = solve_at_t(problem("F3_3.25"), 1.0, SolverConfig(n=1500))
    assert not isinstance(sol, DivergenceDiagnosis)
    assert sol.diagnostics["residual_inf"] <= 1e-11


def test_coupled_two_class_problem_converges():
    e = catalog.get("P4_O(1,-1)")
    dec = e.family.decomposition(Fraction(2))
    p = build_problem(e.datum, dec, "coupled")
    assert p.k == 2
    sol = solve_at_t(p, 0.5, SolverConfig(n=1500))
    assert not isinstance(sol, DivergenceDiagnosis)
    u = sol.u
    base = sol.grid.base_index()
    assert abs(u[1, base] - u[0, base]) < 1e-12


def test_rank_two_is_refused():
    with pytest.raises(RankTooHigh):
        problem("RA1")


def test_legendre_involution_error_is_first_order():
    errs = []
    for n in (1000, 2000, 4000):
        a = np.linspace(-12, 12, n)
        h = a[1] - a[0]
        u = np.logaddexp(-2 * a, 3 * a)
        slopes = np.linspace(-1.999, 2.999, n)
        ustar = legendre(a, u, slopes)
        back = legendre(slopes, ustar, a[n // 4 : 3 * n // 4])
        errs.append((h, np.abs(back - u[n // 4 : 3 * n // 4]).max()))
    for h, err in errs:
        assert err <= 1.0 * h
    # log-sum-exp is conjugate to the negative entropy of λ = (p + 2)/5
    a = np.linspace(-30, 30, 6001)
    u = np.logaddexp(-2 * a, 3 * a)
    p = np.linspace(-1.9, 2.9, 50)
    lam = (p + 2) / 5
    exact = lam * np.log(lam) + (1 - lam) * np.log(1 - lam)
    assert np.abs(legendre(a, u, p) - exact).max() < 1e-3


def test_legendre_rejects_nonconvex_input():
    a = np.linspace(-1, 1, 11)
    with pytest.raises(NonConvexInput):
        legendre(a, -(a**2), np.array([0.0]))


def _inputs(n=400, k=2, seed=0):
    rng = np.random.default_rng(seed)
    phi = np.sort(rng.random((k, n + 1)), axis=1)
    g = rng.random((k, n + 1)) + 0.1
    R = rng.random(n)
    return phi, g, R


@pytest.mark.skipif(compiled is None, reason="compiled kernels not built")
def test_backends_agree():
    phi, g, R = _inputs()
    assert np.allclose(compiled.flux_residual(phi, R, 0.1), _fallback.flux_residual(phi, R, 0.1), rtol=1e-14, atol=1e-14)
    assert np.allclose(compiled.banded_jacobian(g, R, 0.1, 0.4), _fallback.banded_jacobian(g, R, 0.1, 0.4), rtol=1e-14, atol=1e-14)
    a = np.linspace(-5, 5, 300)
    u = np.logaddexp(-a, 2 * a)
    p = np.linspace(-0.9, 1.9, 77)
    (vc, ic), (vf, if_) = compiled.legendre(a, u, p), _fallback.legendre(a, u, p)
    assert np.allclose(vc, vf, rtol=1e-13, atol=1e-13)
    # maximizers may differ only on exact ties
    assert np.allclose(p * a[ic] - u[ic], p * a[if_] - u[if_], rtol=1e-13, atol=1e-13)


def test_pure_python_switch():
    env = dict(os.environ, HOROKE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from horoke.masolver import BACKEND; print(BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
    assert kernels.BACKEND in ("numpy", "cython")


def test_csv_output_shape():
    sol = solve_at_t(problem("F3_3.31"), 0.25, SolverConfig(n=600))
    lines = to_csv(sol).splitlines()
    assert lines[0] == "node,a,u_1,density"
    assert len(lines) == 601
    assert stokes_residual(sol, 0.0) == 0.0
