"""Tests for the SPD factorization, refinement and residual checks."""

import numpy as np
import pytest

from sensbounds.forms import assemble_load, assemble_operator, build_frame_problem
from sensbounds.linalg import (
    IndefiniteMatrixError,
    SolverError,
    SymSparse,
    factorize,
    relative_residual,
    solve_spd,
)
from sensbounds.parameters import Parameter

EXTENDED = np.finfo(np.longdouble).eps < np.finfo(np.float64).eps
needs_extended = pytest.mark.skipif(
    not EXTENDED, reason="np.longdouble is plain double on this platform"
)


def _laplacian(n: int) -> SymSparse:
    """1D Dirichlet Laplacian plus a small shift; SPD and banded."""
    A = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1) + 0.01 * np.eye(n)
    return SymSparse.from_dense(A)


class TestDirectSolve:
    def test_matches_dense_oracle(self):
        A = _laplacian(40)
        b = np.sin(np.arange(40.0))
        x = solve_spd(A, b)
        np.testing.assert_allclose(x, np.linalg.solve(A.to_dense(), b), rtol=1e-10)

    def test_relative_residual_within_tolerance(self):
        A = _laplacian(100)
        b = np.ones(100)
        factor = factorize(A, rel_tol=1e-13)
        x = factor.solve(b)
        assert factor.method == "cholesky-banded"
        assert factor.residual(x, b) <= 1e-13

    def test_relative_residual_definition(self):
        A = SymSparse.from_dense(np.diag([2.0, 4.0]))
        x = np.array([1.0, 1.0])
        b = np.array([3.0, 4.0])
        assert relative_residual(A, x, b) == pytest.approx(0.2)
        assert relative_residual(A, np.zeros(2), np.zeros(2)) == 0.0

    def test_returns_extended_precision(self):
        x = solve_spd(_laplacian(5), np.ones(5))
        assert x.dtype == np.longdouble

    def test_factorization_reused(self):
        A = _laplacian(10)
        factor = factorize(A)
        for k in range(3):
            b = np.arange(1.0, 11.0) ** k
            assert relative_residual(A, factor.solve(b), b) <= 1e-12

    def test_zero_rhs(self):
        factor = factorize(_laplacian(5))
        np.testing.assert_array_equal(factor.solve(np.zeros(5)), np.zeros(5))

    def test_empty_system(self):
        factor = factorize(SymSparse.zeros(0))
        assert factor.method == "empty"
        assert factor.solve(np.zeros(0)).shape == (0,)

    def test_rhs_dimension_mismatch(self):
        with pytest.raises(ValueError, match="Dimension mismatch"):
            factorize(_laplacian(4)).solve(np.ones(3))


class TestFrameStiffness:
    @needs_extended
    @pytest.mark.parametrize("n", [16, 32, 50])
    def test_residual_post_condition(self, n):
        # ‖b - Ax‖/‖b‖ of a double-precision solve is ~1e-10 here
        problem = build_frame_problem(Parameter.BETA1, n)
        K = assemble_operator(problem, "K")
        f = assemble_load(problem, "f")
        x = solve_spd(K, f)
        assert relative_residual(K, x, f) <= 1e-12
        r = f - K.full() @ x
        assert float(np.linalg.norm(r) / np.linalg.norm(f)) <= 1e-12

    @needs_extended
    def test_refinement_beats_plain_cholesky(self):
        problem = build_frame_problem(Parameter.BETA1, 32)
        K = assemble_operator(problem, "K")
        f = assemble_load(problem, "f")
        factor = factorize(K)
        plain = relative_residual(K, factor._raw_solve(f), f)
        assert relative_residual(K, factor.solve(f), f) < plain

    def test_unreachable_tolerance_raises(self):
        problem = build_frame_problem(Parameter.BETA1, 8)
        K = assemble_operator(problem, "K")
        f = assemble_load(problem, "f")
        with pytest.raises(SolverError, match="relative residual") as info:
            solve_spd(K, f, rel_tol=1e-40)
        assert info.value.residual > 1e-40
        assert info.value.method == "cholesky-banded"


class TestIterativeFallback:
    def test_cg_when_band_too_large(self):
        A = _laplacian(30)
        b = np.cos(np.arange(30.0))
        factor = factorize(A, max_band_bytes=16)
        assert factor.method == "cg-jacobi"
        x = factor.solve(b)
        np.testing.assert_allclose(x, np.linalg.solve(A.to_dense(), b), rtol=1e-9)
        assert factor.residual(x, b) <= 1e-12


class TestFailures:
    def test_non_positive_diagonal(self):
        A = SymSparse.from_dense(np.array([[1.0, 0.0], [0.0, -1.0]]))
        with pytest.raises(IndefiniteMatrixError, match="Non-positive diagonal"):
            factorize(A)

    def test_indefinite_matrix(self):
        A = SymSparse.from_dense(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(IndefiniteMatrixError):
            factorize(A)

    def test_indefinite_is_a_solver_error(self):
        assert issubclass(IndefiniteMatrixError, SolverError)

    def test_error_carries_residual_and_method(self):
        err = SolverError("failed", residual=1e-3, method="cg-jacobi")
        assert err.residual == 1e-3
        assert err.method == "cg-jacobi"
