"""Damped Newton continuation for the rank-one coupled real MA equation.

Discretization (cell-centred, nodes a_j = a_0 + (j + 1/2) h): with
Φ_i(p) = ∫_{pmin}^p G_i and D = (u_{j+1} − u_j)/h on interior faces,

    Φ_i(D_{j+1/2}) − Φ_i(D_{j−1/2}) = h J(a_j) exp(−Σ_m (t u_m + (1−t) u_m^ref)(a_j))

with boundary fluxes 0 at the left end and 1 at the right end, which are the
asymptotic slopes min Δ_i and max Δ_i. Summing over j gives total mass one.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve

from . import kernels
from .problem import MAProblem, MASolverError


class NewtonDiverged(MASolverError):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


class ContinuationStalled(NewtonDiverged):
    """Step size fell below dt_min; carries the last converged solution."""

    def __init__(self, message: str, trace: list, t_reached: float, last: "MASolution | None"):
        super().__init__(message, trace)
        self.t_reached = t_reached
        self.last = last


class WindowTooSmall(MASolverError):
    pass


class NonConvexInput(MASolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    n: int = 3000
    L: float = 30.0
    tol: float = 1e-11
    max_newton: int = 30
    max_halvings: int = 60
    dt0: float = 0.05
    dt_min: float = 1e-4
    boundary_nodes: int = 5
    doublings: int = 2


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n: int

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.lo + (np.arange(self.n) + 0.5) * self.h

    def base_index(self) -> int:
        """Node nearest the apex (0), offset into the interior."""
        return int(np.clip(np.argmin(np.abs(self.nodes)), 0, self.n - 1))


@dataclass(frozen=True)
class MASolution:
    grid: Grid
    u: np.ndarray  # (k, n)
    t: float
    diagnostics: dict = field(default_factory=dict)
    problem: MAProblem | None = None
    ref_shift: float = 0.0

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def nu(self) -> np.ndarray:
        return _nu(self.problem, self.grid, self.u, self.t, self.ref_shift)

    def slopes(self) -> np.ndarray:
        """Centred first differences of each u_i (one-sided at the ends)."""
        return np.gradient(self.u, self.grid.h, axis=1)

    def density(self) -> np.ndarray:
        return np.exp(-self.nu())


@dataclass(frozen=True)
class DivergenceDiagnosis:
    t: float
    reason: str
    x_path: tuple  # x_t for each window tried
    windows: tuple
    last_solution: MASolution | None = None

    @property
    def converged(self) -> bool:
        return False


# -- discrete operators ------------------------------------------------------------------

def _ref(problem: MAProblem, a: np.ndarray, shift: float) -> np.ndarray:
    """Σ_m u_m^ref with the mass-normalizing shift applied to the sum."""
    return sum(problem.u_ref(i, a) for i in range(problem.k)) + shift


def _nu(problem, grid, u, t, shift) -> np.ndarray:
    a = grid.nodes
    return problem.j(a) + t * u.sum(axis=0) + (1.0 - t) * _ref(problem, a, shift)


def _faces(problem, grid, u):
    """Φ_i and dΦ_i/dD at all faces (boundary faces fixed at 0 and 1)."""
    h = grid.h
    k, n = u.shape
    D = np.diff(u, axis=1) / h
    phi = np.empty((k, n + 1))
    g = np.zeros((k, n + 1))
    for i, dens in enumerate(problem.densities):
        phi[i, 1:-1] = dens.Phi(D[i])
        g[i, 1:-1] = dens.G_jac(D[i])
    phi[:, 0] = 0.0
    phi[:, -1] = 1.0
    return phi, g


def _residual(problem, grid, u, t, shift):
    R = np.exp(-np.clip(_nu(problem, grid, u, t, shift), -700.0, 700.0))
    phi, g = _faces(problem, grid, u)
    F = kernels.flux_residual(np.ascontiguousarray(phi), R, grid.h)
    return F, R, g


def _normalize_rows(F, u, base):
    """Rows (i ≥ 1, base) become u_i(base) − u_0(base): the mass rows are redundant."""
    F = F.copy()
    for i in range(1, F.shape[0]):
        F[i, base] = u[i, base] - u[0, base]
    return F


def _jacobian(problem, grid, u, t, R, g, base):
    k, n = u.shape
    ab = kernels.banded_jacobian(np.ascontiguousarray(g), R, grid.h, t)
    for i in range(1, k):
        r = base * k + i
        for c in range(max(0, r - k), min(k * n, r + k + 1)):
            ab[k + r - c, c] = 0.0
        ab[k, r] = 1.0
        ab[k + r - base * k, base * k] = -1.0
    return ab


def _flatten(F):
    return F.T.reshape(-1)


def _unflatten(x, k, n):
    return x.reshape(n, k).T


def _pin_data(problem, grid, u, pin):
    """Constraint ν'(a_pin) = 0 at t = 1 and the bordering column."""
    h = grid.h
    a = grid.nodes
    k, n = u.shape
    dnu = np.gradient(u.sum(axis=0), h) + problem.dj(a)
    c = np.zeros(k * n)
    c[(pin + 1) * k : (pin + 2) * k] = 1.0 / (2 * h)
    c[(pin - 1) * k : pin * k] = -1.0 / (2 * h)
    value = (u[:, pin + 1].sum() - u[:, pin - 1].sum()) / (2 * h) + problem.dj(np.array([a[pin]]))[0]
    # translation direction in each class: u_i' plus constants that keep Σ = j' and the normalization
    slopes = np.gradient(u, h, axis=1)
    b = np.zeros((k, n))
    for i in range(k):
        b[i] = h * (slopes[i] + (dnu - slopes.sum(axis=0)) / k)
    b = _normalize_rows(b, np.zeros_like(u), grid.base_index())
    return c, value, _flatten(b)


def _banded_to_sparse(ab, k, N):
    diags = []
    offsets = []
    for row in range(2 * k + 1):
        off = k - row
        if off >= 0:
            diags.append(ab[row, off:])
        else:
            diags.append(ab[row, : N + off])
        offsets.append(off)
    return sp.diags(diags, offsets, shape=(N, N), format="csc")


def _newton(problem, grid, u0, t, shift, cfg, pin=None):
    k, n = u0.shape
    N = k * n
    base = grid.base_index()
    u = u0.copy()
    s = 0.0
    trace = []

    def full_residual(u_, s_):
        F, R, g = _residual(problem, grid, u_, t, shift)
        F = _normalize_rows(F, u_, base)
        if pin is None:
            return _flatten(F), R, g, None
        c, value, b = _pin_data(problem, grid, u_, pin)
        return np.concatenate([_flatten(F) + s_ * b, [value]]), R, g, (c, b)

    res, R, g, extra = full_residual(u, s)
    norm = float(np.max(np.abs(res)))
    for it in range(cfg.max_newton):
        trace.append(norm)
        if norm <= cfg.tol:
            if pin is not None and abs(s) * float(np.max(np.abs(extra[1]))) > cfg.tol:
                # the bordered system only closes with a nonzero translation multiplier
                raise NewtonDiverged(f"translation multiplier {s:.3e} absorbs a nonzero obstruction", trace)
            return u, s, it, norm, trace
        ab = _jacobian(problem, grid, u, t, R, g, base)
        if pin is None:
            step = solve_banded((k, k), ab, -res)
            du, ds = _unflatten(step, k, n), 0.0
        else:
            c, b = extra
            A = _banded_to_sparse(ab, k, N)
            M = sp.bmat([[A, sp.csc_matrix(b[:, None])], [sp.csr_matrix(c[None, :]), None]], format="csc")
            step = spsolve(M, -res)
            du, ds = _unflatten(step[:N], k, n), float(step[N])
        if not np.all(np.isfinite(du)):
            raise NewtonDiverged("non-finite Newton step", trace)
        alpha = 1.0
        for _ in range(cfg.max_halvings):
            cand = u + alpha * du
            cres, cR, cg, cextra = full_residual(cand, s + alpha * ds)
            cnorm = float(np.max(np.abs(cres)))
            if np.isfinite(cnorm) and cnorm < norm:
                break
            alpha *= 0.5
        else:
            raise NewtonDiverged(f"line search failed at iteration {it} (residual {norm:.3e})", trace)
        u, s, res, R, g, extra, norm = cand, s + alpha * ds, cres, cR, cg, cextra, cnorm
    trace.append(norm)
    raise NewtonDiverged(f"no convergence in {cfg.max_newton} iterations (residual {norm:.3e})", trace)


def _initial(problem: MAProblem, grid: Grid):
    """Exact t = 0 solution: fluxes are cumulative reference masses."""
    a = grid.nodes
    h = grid.h
    raw = problem.j(a) + _ref(problem, a, 0.0)
    m = raw.min()
    mass = h * np.exp(-(raw - m)).sum()
    shift = -m + math.log(mass)  # Σ h e^{−(raw + shift)} = 1
    R = np.exp(-(raw + shift))
    cum = np.cumsum(h * R)[:-1]
    k, n = problem.k, grid.n
    u = np.zeros((k, n))
    base = grid.base_index()
    level = float(_ref(problem, a[base : base + 1], 0.0)[0]) / k
    for i, dens in enumerate(problem.densities):
        D = dens.Phi_inverse(cum)
        ui = np.concatenate([[0.0], np.cumsum(D * h)])
        u[i] = ui - ui[base] + level
    return u, shift, R


def _check_window(problem, grid, R, cfg):
    tail = R[: cfg.boundary_nodes].sum() + R[-cfg.boundary_nodes :].sum()
    if not np.isfinite(tail) or tail * grid.h > 1e-6:
        raise WindowTooSmall(f"reference mass reaches the window ends (tail {tail * grid.h:.2e})")


def minimizer(nu: np.ndarray, nodes: np.ndarray) -> tuple[float, float, int]:
    """(m_t, x_t, node index) with a parabolic refinement of the discrete argmin."""
    j = int(np.argmin(nu))
    x = float(nodes[j])
    m = float(nu[j])
    if 0 < j < len(nu) - 1:
        y0, y1, y2 = nu[j - 1], nu[j], nu[j + 1]
        den = y0 - 2 * y1 + y2
        if den > 0:
            off = 0.5 * (y0 - y2) / den
            h = nodes[1] - nodes[0]
            x = float(nodes[j] + off * h)
            m = float(y1 - 0.25 * (y0 - y2) * off)
    return m, x, j


def _solve_on_grid(problem: MAProblem, grid: Grid, t: float, cfg: SolverConfig) -> MASolution:
    u, shift, R0 = _initial(problem, grid)
    _check_window(problem, grid, R0, cfg)
    cur_t = 0.0
    dt = cfg.dt0
    steps = 0
    iterations = 0
    traces = []
    pin_mult = 0.0
    path = []
    while cur_t < t:
        nxt = min(t, cur_t + dt)
        pin = None
        if nxt >= 1.0 and problem.full_line:
            nu = _nu(problem, grid, u, nxt, shift)
            pin = int(np.clip(np.argmin(nu), 1, grid.n - 2))
        try:
            u_new, s, its, _, trace = _newton(problem, grid, u, nxt, shift, cfg, pin)
        except NewtonDiverged as exc:
            traces.append(exc.trace)
            dt *= 0.5
            if dt < cfg.dt_min:
                last = None
                if cur_t > 0:
                    last = _with_diagnostics(MASolution(grid, u, cur_t, {}, problem, shift), steps, iterations, pin_mult, path)
                raise ContinuationStalled(f"continuation stalled at t = {cur_t:.6f}", traces, cur_t, last) from None
            continue
        u, cur_t = u_new, nxt
        pin_mult = s
        steps += 1
        iterations += its
        dt = min(dt * 1.5, 0.25)
        m, x, _ = minimizer(_nu(problem, grid, u, cur_t, shift), grid.nodes)
        path.append((cur_t, x, m))
    sol = MASolution(grid, u, float(t), {}, problem, shift)
    return _with_diagnostics(sol, steps, iterations, pin_mult, path)


def _with_diagnostics(sol: MASolution, steps: int, iterations: int, pin_mult: float, path=()) -> MASolution:
    problem, grid = sol.problem, sol.grid
    F, R, _ = _residual(problem, grid, sol.u, sol.t, sol.ref_shift)
    F = _normalize_rows(F, sol.u, grid.base_index())
    nu = sol.nu()
    m, x, j = minimizer(nu, grid.nodes)
    second = np.diff(sol.u, 2, axis=1)
    diag = {
        "t": sol.t,
        "n": grid.n,
        "window": [grid.lo, grid.hi],
        "h": grid.h,
        "m_t": m,
        "x_t": x,
        "x_index": j,
        "residual_inf": float(np.max(np.abs(F))),
        "mass": float(grid.h * np.exp(-nu).sum()),
        "min_second_difference": float(second.min()) if second.size else 0.0,
        "continuation_steps": steps,
        "newton_iterations": iterations,
        "pin_multiplier": float(pin_mult),
        "path": [[float(v) for v in row] for row in path],
        "stokes_residual": stokes_residual(sol, 1.0),
        "slope_barycenters": [float(v) for v in slope_barycenters(sol)],
        "backend": kernels.BACKEND,
    }
    return MASolution(grid, sol.u, sol.t, diag, problem, sol.ref_shift)


def _window(problem: MAProblem, L: float, h: float) -> Grid:
    n = int(round((2 * L if problem.full_line else L) / h))
    return Grid(-L, L, n) if problem.full_line else Grid(-L, 0.0, n)


def _near_boundary(sol: MASolution, cfg: SolverConfig) -> bool:
    j = sol.diagnostics["x_index"]
    n = sol.grid.n
    if sol.problem.full_line:
        return j < cfg.boundary_nodes or j >= n - cfg.boundary_nodes
    return j < cfg.boundary_nodes


def solve_at_t(problem: MAProblem, t: float, cfg: SolverConfig | None = None):
    """MASolution, or DivergenceDiagnosis when x_t keeps leaving enlarged windows."""
    cfg = cfg or SolverConfig()
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    width = 2 * cfg.L if problem.full_line else cfg.L
    h = width / cfg.n
    L = cfg.L
    xs, windows, reached, stall_paths = [], [], [], []
    last = None
    failure = None
    for attempt in range(cfg.doublings + 1):
        grid = _window(problem, L, h)
        windows.append((grid.lo, grid.hi))
        L *= 2
        try:
            sol = _solve_on_grid(problem, grid, t, cfg)
        except ContinuationStalled as exc:
            # the path stops short of t; record where its minimizer had got to
            failure = exc
            last = exc.last or last
            xs.append(exc.last.diagnostics["x_t"] if exc.last else None)
            reached.append(exc.t_reached)
            stall_paths.append(exc.last.diagnostics["path"] if exc.last else [])
            continue
        except NewtonDiverged as exc:
            failure = exc
            xs.append(None)
            reached.append(None)
            continue
        last = sol
        xs.append(sol.diagnostics["x_t"])
        reached.append(float(t))
        if not _near_boundary(sol, cfg):
            return sol
    known = [x for x in xs if x is not None]
    if not known:
        return DivergenceDiagnosis(float(t), f"continuation failed in every window: {failure}", tuple(xs), tuple(windows), None)
    stalled = all(r is not None and r < t for r in reached)
    if stalled and all(_escaping(path) for path in stall_paths):
        reason = f"minimizer escapes as the path approaches t = {min(reached):.6f}, in every window"
    elif all(x is not None for x in xs) and all(abs(q) > abs(p) + h for p, q in zip(xs, xs[1:])):
        reason = "minimizer leaves every window"
    else:
        reason = "minimizer does not settle under window enlargement"
    return DivergenceDiagnosis(float(t), reason, tuple(xs), tuple(windows), last)


def _escaping(path, tail: int = 4) -> bool:
    """|x_t| increasing at an increasing rate over the last steps, far above its path average."""
    if len(path) < tail:
        return False
    xs = [abs(row[1]) for row in path[-tail:]]
    ts = [row[0] for row in path[-tail:]]
    rates = [(b - a) / (tb - ta) for a, b, ta, tb in zip(xs, xs[1:], ts, ts[1:])]
    average = abs(abs(path[-1][1]) - abs(path[0][1])) / (path[-1][0] - path[0][0])
    return all(r > 0 for r in rates) and rates[-1] > rates[0] and rates[-1] > 10 * average


# -- diagnostics ---------------------------------------------------------------------------

def _derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central differences, second order at the two outer nodes."""
    g = np.gradient(f, h, edge_order=2)
    if f.shape[-1] >= 5:
        g[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / (12 * h)
    return g


def stokes_residual(sol: MASolution, xi: float) -> float:
    """Grid quadrature of ∫ dν_t(ξ) e^{−ν_t}; vanishes for exact solutions."""
    if xi == 0:
        return 0.0
    nu = sol.nu()
    return float(xi * sol.grid.h * np.sum(_derivative(nu, sol.grid.h) * np.exp(-nu)))


def stokes_split(sol: MASolution, xi: float) -> dict:
    """t Σ ∫du_m(ξ) e^{−ν} + (1−t) ∫du_ref(ξ) e^{−ν} + ∫dj(ξ) e^{−ν}, term by term."""
    p, grid, t = sol.problem, sol.grid, sol.t
    a, h = grid.nodes, grid.h
    w = np.exp(-sol.nu())
    du = _derivative(sol.u.sum(axis=0), h)
    dref = _derivative(_ref(p, a, sol.ref_shift), h)
    dj = _derivative(p.j(a), h)
    terms = {
        "potentials": float(t * xi * h * np.sum(du * w)),
        "reference": float((1 - t) * xi * h * np.sum(dref * w)),
        "j": float(xi * h * np.sum(dj * w)),
    }
    terms["total"] = terms["potentials"] + terms["reference"] + terms["j"]
    return terms


def slope_barycenters(sol: MASolution) -> np.ndarray:
    """∫ du_i e^{−ν}: barycenter of the pushforward of e^{−ν} da by du_i."""
    w = np.exp(-sol.nu())
    return sol.grid.h * (sol.slopes() * w[None, :]).sum(axis=1)


def track_minimizer(problem: MAProblem, ts, cfg: SolverConfig | None = None) -> list[dict]:
    out = []
    for t in ts:
        res = solve_at_t(problem, float(t), cfg)
        if isinstance(res, DivergenceDiagnosis):
            out.append({"t": float(t), "converged": False, "x_t": res.x_path[-1], "m_t": None, "reason": res.reason})
        else:
            out.append({"t": float(t), "converged": True, "x_t": res.diagnostics["x_t"], "m_t": res.diagnostics["m_t"]})
    return out


# -- Legendre transform ---------------------------------------------------------------------

def legendre(a: np.ndarray, u: np.ndarray, p: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Discrete Legendre transform sup_j (p a_j − u_j) at the slopes p."""
    a = np.ascontiguousarray(a, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    p = np.ascontiguousarray(p, dtype=float)
    if np.any(np.diff(a) <= 0):
        raise NonConvexInput("nodes must be increasing")
    if u.size > 2:
        slopes = np.diff(u) / np.diff(a)
        if np.any(np.diff(slopes) < -tol * (1 + np.abs(slopes[1:]))):
            raise NonConvexInput("input is not discretely convex")
    order = np.argsort(p, kind="stable")
    vals, _ = kernels.legendre_sorted(a, u, p[order])
    out = np.empty_like(vals)
    out[order] = vals
    return out


# -- output ---------------------------------------------------------------------------------

def to_csv(sol: MASolution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    k = sol.u.shape[0]
    w.writerow(["node", "a"] + [f"u_{i + 1}" for i in range(k)] + ["density"])
    dens = sol.density()
    for j, a in enumerate(sol.nodes):
        w.writerow([j, f"{a:.12e}"] + [f"{sol.u[i, j]:.12e}" for i in range(k)] + [f"{dens[j]:.12e}"])
    return buf.getvalue()


def diagnostics_json(sol) -> str:
    if isinstance(sol, DivergenceDiagnosis):
        data = {"converged": False, "t": sol.t, "reason": sol.reason, "x_path": list(sol.x_path), "windows": [list(w) for w in sol.windows]}
    else:
        data = {"converged": True, **sol.diagnostics}
    return json.dumps(data, sort_keys=True, indent=2)
