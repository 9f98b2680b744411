"""
Staggered solution of the block primal and adjoint problems.

The block operator is lower block-triangular,

    [ K     0 ] [u]   [  f   ]          [ K   ξK' ] [w]   [  0  ]
    [ ξK'   K ] [U] = [ ξ f' ]          [ 0    K  ] [W] = [ g/ξ ]

so both pairs follow from two SPD solves with the same K. The block matrix
is never formed; one factorization of K serves every solve.
"""

import logging
from threading import Lock

import numpy as np

from sensbounds.forms import (
    ParamProblem,
    QoI,
    assemble_load,
    assemble_operator,
)
from sensbounds.linalg import DEFAULT_REL_TOL, SolverError, factorize, matvec
from sensbounds.parameters import Role

from .FieldPair import FieldPair

logger = logging.getLogger(__name__)


class SensitivitySystem:
    """
    Assembled K, K', f, f' of one problem with a reusable factorization of K.

    Example:
        system = SensitivitySystem(problem)
        primal = system.primal_pair()
        adjoint = system.adjoint_pair(qoi)
        j_h = evaluate_qoi(primal, qoi)

    Thread Safety:
        Solves only read the factorization; the running maximum of solver
        residuals is kept under a lock.
    """

    def __init__(self, problem: ParamProblem, rel_tol: float = DEFAULT_REL_TOL):
        self.problem = problem
        self.rel_tol = rel_tol
        self.K = assemble_operator(problem, "K")
        self.K_prime = assemble_operator(problem, "K'")
        self.f = assemble_load(problem, "f")
        self.f_prime = assemble_load(problem, "f'")
        self._factor = factorize(self.K, rel_tol=rel_tol)
        self._lock = Lock()
        self._max_residual = 0.0
        logger.debug(
            "Assembled %s: %d DOFs, K' %s, factorization %s",
            problem.label or problem.model.value,
            self.K.dimension,
            "zero" if self.K_prime.is_zero() else f"nnz={self.K_prime.nnz}",
            self._factor.method,
        )

    @property
    def xi(self) -> float:
        return self.problem.xi

    @property
    def max_residual(self) -> float:
        with self._lock:
            return self._max_residual

    def solve(self, b: np.ndarray) -> tuple[np.ndarray, float]:
        x = self._factor.solve(b)
        eta = self._factor.residual(x, b)
        with self._lock:
            self._max_residual = max(self._max_residual, eta)
        return x, eta

    def k_prime_action(self, x: np.ndarray) -> np.ndarray:
        if self.K_prime.is_zero():
            return np.zeros_like(x)
        return matvec(self.K_prime, x)

    # ------------------------------------------------------------------ #
    # Block solves
    # ------------------------------------------------------------------ #

    def primal_pair(self) -> FieldPair:
        xi = self.xi
        u, eta_u = self.solve(self.f)
        U, eta_U = self.solve(xi * self.f_prime - xi * self.k_prime_action(u))
        pair = FieldPair(u, U, xi, Role.PRIMAL, solver_residual=max(eta_u, eta_U))
        self._check(pair)
        return pair

    def adjoint_pair(self, qoi: QoI) -> FieldPair:
        xi = self.xi
        g = qoi.extraction_vector
        W, eta_W = self.solve(g / xi)
        w, eta_w = self.solve(-xi * self.k_prime_action(W))
        pair = FieldPair(w, W, xi, Role.ADJOINT, solver_residual=max(eta_w, eta_W))
        self._check(pair, g)
        return pair

    def _check(self, pair: FieldPair, g: np.ndarray | None = None) -> None:
        """Re-check both block equations of ``pair`` against rel_tol."""
        xi = pair.xi
        if pair.role is Role.PRIMAL:
            checks = [
                (pair.first, self.f),
                (pair.second, xi * self.f_prime - xi * self.k_prime_action(pair.first)),
            ]
        else:
            assert g is not None
            checks = [
                (pair.second, g / xi),
                (pair.first, -xi * self.k_prime_action(pair.second)),
            ]
        for x, b in checks:
            eta = self._factor.residual(x, b)
            if eta > self.rel_tol:
                raise SolverError(
                    f"{pair.role.value} pair violates its block equation: "
                    f"relative residual {eta:.3e}",
                    residual=eta,
                    method=self._factor.method,
                )


# ---------------------------------------------------------------------- #
# Functional API
# ---------------------------------------------------------------------- #


def solve_primal_pair(
    problem: ParamProblem, system: SensitivitySystem | None = None
) -> FieldPair:
    return (system or SensitivitySystem(problem)).primal_pair()


def solve_adjoint_pair(
    problem: ParamProblem, qoi: QoI, system: SensitivitySystem | None = None
) -> FieldPair:
    return (system or SensitivitySystem(problem)).adjoint_pair(qoi)


def evaluate_qoi(pair: FieldPair, qoi: QoI) -> float:
    """J(u'_h) = gᵀ U_h / ξ."""
    if pair.role is not Role.PRIMAL:
        raise ValueError(f"evaluate_qoi needs a primal pair, got {pair.role.value}")
    return float(qoi.extraction_vector @ pair.second) / pair.xi


def adjoint_state_value(
    problem: ParamProblem,
    qoi: QoI,
    pair_primal: FieldPair,
    pair_adjoint: FieldPair,
    system: SensitivitySystem | None = None,
) -> float:
    """λᵀ(f' - K' u) with λ = ξ W; equals :func:`evaluate_qoi` up to round-off."""
    if pair_primal.role is not Role.PRIMAL or pair_adjoint.role is not Role.ADJOINT:
        raise ValueError("adjoint_state_value needs (primal, adjoint) pairs")
    if system is None:
        K_prime = assemble_operator(problem, "K'")
        f_prime = assemble_load(problem, "f'")
        k_u = (
            np.zeros_like(pair_primal.first)
            if K_prime.is_zero()
            else matvec(K_prime, pair_primal.first)
        )
    else:
        f_prime = system.f_prime
        k_u = system.k_prime_action(pair_primal.first)
    lam = pair_adjoint.adjoint_state()
    return float(lam @ (f_prime - k_u))
