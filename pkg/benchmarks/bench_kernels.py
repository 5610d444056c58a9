"""Compiled vs numpy solver kernels, plus one full solve per backend.

    python3 benchmarks/bench_kernels.py [--n 3000] [--k 2] [--repeat 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from horoke.masolver import _fallback, kernels

try:
    from horoke.masolver import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _inputs(n: int, k: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    phi = np.sort(rng.random((k, n + 1)), axis=1)
    g = rng.random((k, n + 1)) + 0.1
    R = rng.random(n)
    a = np.linspace(-30.0, 30.0, n)
    u = np.log(np.exp(-2.0 * a) + np.exp(3.0 * a))
    p = np.linspace(-2.5, 3.5, n)
    return phi, g, R, a, u, p


def bench_kernels(n: int, k: int, repeat: int) -> list[tuple[str, float, float | None]]:
    phi, g, R, a, u, p = _inputs(n, k)
    h = 60.0 / n
    rows = []
    cases = [
        ("flux_residual", lambda m: m.flux_residual(phi, R, h)),
        ("banded_jacobian", lambda m: m.banded_jacobian(g, R, h, 0.5)),
        ("legendre", lambda m: m.legendre(a, u, p)),
    ]
    for name, call in cases:
        fb = _best(lambda: call(_fallback), repeat)
        cy = _best(lambda: call(_compiled), repeat) if _compiled is not None else None
        if cy is not None:
            ref, got = call(_fallback), call(_compiled)
            ref = ref[0] if isinstance(ref, tuple) else ref
            got = got[0] if isinstance(got, tuple) else got
            if not np.allclose(ref, got, rtol=1e-12, atol=1e-12):
                raise AssertionError(f"{name}: backends disagree")
        rows.append((name, fb, cy))
    return rows


def bench_solve(n: int) -> list[tuple[str, float]]:
    from horoke import catalog, criteria
    from horoke.masolver import SolverConfig, build_problem, solve_at_t

    e = catalog.get("F3_2.36")
    problem = build_problem(e.datum, criteria.Decomposition.single(e.anticanonical_polytope))
    cfg = SolverConfig(n=n)
    out = []
    saved = (kernels.flux_residual, kernels.banded_jacobian)
    impls = [("numpy", _fallback)] + ([("cython", _compiled)] if _compiled is not None else [])
    try:
        for label, impl in impls:
            kernels.flux_residual, kernels.banded_jacobian = impl.flux_residual, impl.banded_jacobian
            t0 = time.perf_counter()
            solve_at_t(problem, 0.5, cfg)
            out.append((label, time.perf_counter() - t0))
    finally:
        kernels.flux_residual, kernels.banded_jacobian = saved
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3000)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    print(f"default backend: {kernels.BACKEND}; compiled module {'present' if _compiled else 'absent'}")
    print(f"{'kernel':<18}{'numpy (ms)':>12}{'cython (ms)':>13}{'speedup':>10}")
    for name, fb, cy in bench_kernels(args.n, args.k, args.repeat):
        cy_s = f"{cy * 1e3:13.3f}" if cy is not None else f"{'-':>13}"
        sp = f"{fb / cy:10.1f}" if cy else f"{'-':>10}"
        print(f"{name:<18}{fb * 1e3:12.3f}{cy_s}{sp}")
    print("full solve, F3_2.36 at t = 0.5:")
    for label, secs in bench_solve(args.n):
        print(f"  {label:<8}{secs:8.3f} s")


if __name__ == "__main__":
    main()
