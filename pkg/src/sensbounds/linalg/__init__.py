"""Symmetric sparse storage and SPD solvers."""

from .SPDSolver import (
    DEFAULT_REL_TOL,
    Factorization,
    IndefiniteMatrixError,
    SolverError,
    factorize,
    relative_residual,
    solve_spd,
)
from .SymSparse import SymSparse, matvec, matvec_extended

__all__ = [
    "DEFAULT_REL_TOL",
    "Factorization",
    "IndefiniteMatrixError",
    "SolverError",
    "SymSparse",
    "factorize",
    "matvec",
    "matvec_extended",
    "relative_residual",
    "solve_spd",
]
