"""Rank-one real Monge-Ampère continuity path with diagnostics."""

from .kernels import BACKEND
from .problem import AssumptionViolated, Density, MAProblem, MASolverError, RankTooHigh, build_problem
from .solver import (
    DivergenceDiagnosis,
    Grid,
    MASolution,
    NewtonDiverged,
    NonConvexInput,
    SolverConfig,
    WindowTooSmall,
    diagnostics_json,
    legendre,
    minimizer,
    slope_barycenters,
    solve_at_t,
    stokes_residual,
    stokes_split,
    to_csv,
    track_minimizer,
)

__all__ = [
    "AssumptionViolated",
    "BACKEND",
    "Density",
    "DivergenceDiagnosis",
    "Grid",
    "MAProblem",
    "MASolution",
    "MASolverError",
    "NewtonDiverged",
    "NonConvexInput",
    "RankTooHigh",
    "SolverConfig",
    "WindowTooSmall",
    "build_problem",
    "diagnostics_json",
    "legendre",
    "minimizer",
    "slope_barycenters",
    "solve_at_t",
    "stokes_residual",
    "stokes_split",
    "to_csv",
    "track_minimizer",
]
