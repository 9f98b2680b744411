"""
Direct and iterative solution of symmetric positive definite systems.

A :class:`Factorization` is built once per matrix and reused for every
right-hand side. The direct path is a banded Cholesky in natural ordering;
if the band would exceed ``max_band_bytes`` the factorization falls back to
Jacobi-preconditioned conjugate gradients.

Every solve is refined until the relative residual

    ρ(x) = ‖b - A x‖₂ / ‖b‖₂

is at most ``rel_tol``. Residuals are formed in extended precision
(``np.longdouble``) and the iterate is accumulated in the same precision,
so the returned vector is a ``longdouble`` array. Corrections come from the
double-precision factorization. On platforms where ``longdouble`` is plain
double the floor of ρ is that of a double vector and fine frame meshes may
raise :class:`SolverError`.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .SymSparse import SymSparse, matvec_extended

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-12
MAX_REFINEMENT_STEPS = 10
DEFAULT_MAX_BAND_BYTES = 512 * 1024 * 1024


class SolverError(RuntimeError):
    """A solve did not reach the requested residual."""

    def __init__(self, message: str, residual: float = float("nan"), method: str = ""):
        super().__init__(message)
        self.residual = residual
        self.method = method


class IndefiniteMatrixError(SolverError):
    """The matrix is not positive definite."""


def _norm(v: np.ndarray) -> np.longdouble:
    return np.sqrt(np.dot(v, v))


def relative_residual(A: SymSparse, x: np.ndarray, b: np.ndarray) -> float:
    """‖b - A x‖₂ / ‖b‖₂ in extended precision, or ‖b - A x‖₂ when b = 0."""
    b = np.asarray(b, dtype=np.longdouble)
    r_norm = _norm(b - matvec_extended(A, x))
    b_norm = _norm(b)
    if b_norm == 0.0:
        return float(r_norm)
    return float(r_norm / b_norm)


@dataclass(slots=True, frozen=True)
class Factorization:
    """
    Reusable solver for one SPD matrix.

    Immutable after construction; :meth:`solve` may be called concurrently.

    Usage:
        factor = factorize(K)
        u = factor.solve(f)
        U = factor.solve(xi * f_prime - xi * matvec(K_prime, u))
    """

    matrix: SymSparse
    method: str  # "cholesky-banded" | "cg-jacobi" | "empty"
    band: np.ndarray | None = field(default=None, repr=False)
    rel_tol: float = DEFAULT_REL_TOL

    def _raw_solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.method == "cholesky-banded":
            assert self.band is not None
            return scipy.linalg.cho_solve_banded((self.band, True), b)
        return _cg_solve(self.matrix, b, self.rel_tol)

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.longdouble)
        if b.shape != (self.matrix.dimension,):
            raise ValueError(
                f"Dimension mismatch: matrix is {self.matrix.dimension}, "
                f"right-hand side is {b.shape}"
            )
        b_norm = _norm(b)
        if self.method == "empty" or b_norm == 0.0:
            return np.zeros_like(b)

        x = self._raw_solve(b).astype(np.longdouble)
        r = b - matvec_extended(self.matrix, x)
        rho = float(_norm(r) / b_norm)
        steps = 0
        while rho > self.rel_tol and steps < MAX_REFINEMENT_STEPS:
            x = x + self._raw_solve(r)
            r = b - matvec_extended(self.matrix, x)
            rho = float(_norm(r) / b_norm)
            steps += 1

        if not np.all(np.isfinite(x)) or rho > self.rel_tol:
            raise SolverError(
                f"{self.method} solve reached relative residual {rho:.3e} "
                f"> rel_tol {self.rel_tol:.1e} after {steps} refinement steps",
                residual=rho,
                method=self.method,
            )
        logger.debug(
            "%s solve: n=%d, relative residual %.3e after %d refinement steps",
            self.method,
            b.size,
            rho,
            steps,
        )
        return x

    def residual(self, x: np.ndarray, b: np.ndarray) -> float:
        return relative_residual(self.matrix, x, b)


def _cg_solve(A: SymSparse, b: np.ndarray, rel_tol: float) -> np.ndarray:
    full = A.full()
    diag = A.diagonal()
    precond = scipy.sparse.linalg.LinearOperator(
        full.shape, matvec=lambda v: v / diag, dtype=float
    )
    x, info = scipy.sparse.linalg.cg(
        full, b, rtol=0.01 * rel_tol, maxiter=10 * A.dimension, M=precond
    )
    if info != 0:
        # The residual check in Factorization.solve decides.
        logger.debug("CG stopped at its iteration limit (info=%d)", info)
    return np.asarray(x)


def factorize(
    A: SymSparse,
    rel_tol: float = DEFAULT_REL_TOL,
    max_band_bytes: int = DEFAULT_MAX_BAND_BYTES,
) -> Factorization:
    if A.dimension == 0:
        return Factorization(matrix=A, method="empty", rel_tol=rel_tol)

    diag = A.diagonal()
    if np.any(diag <= 0.0):
        bad = int(np.flatnonzero(diag <= 0.0)[0])
        raise IndefiniteMatrixError(
            f"Non-positive diagonal entry {diag[bad]:.3e} at row {bad}",
            method="cholesky-banded",
        )

    band_bytes = (A.bandwidth + 1) * A.dimension * 8
    if band_bytes > max_band_bytes:
        logger.warning(
            "Band storage of %d bytes exceeds %d; falling back to CG with Jacobi",
            band_bytes,
            max_band_bytes,
        )
        return Factorization(matrix=A, method="cg-jacobi", rel_tol=rel_tol)

    try:
        band = scipy.linalg.cholesky_banded(A.banded_lower(), lower=True)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteMatrixError(
            f"Banded Cholesky failed: {exc}", method="cholesky-banded"
        ) from exc

    logger.debug(
        "Banded Cholesky: n=%d, bandwidth=%d", A.dimension, A.bandwidth
    )
    return Factorization(matrix=A, method="cholesky-banded", band=band, rel_tol=rel_tol)


def solve_spd(
    A: SymSparse, b: np.ndarray, rel_tol: float = DEFAULT_REL_TOL
) -> np.ndarray:
    """Solve A x = b for SPD ``A``; see :class:`Factorization`."""
    return factorize(A, rel_tol=rel_tol).solve(b)
