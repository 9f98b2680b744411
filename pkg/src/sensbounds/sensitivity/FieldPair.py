"""Coefficient vectors of a block (primal or adjoint) FE solution."""

from dataclasses import dataclass

import numpy as np

from sensbounds.parameters import Role


@dataclass(slots=True, frozen=True)
class FieldPair:
    """
    {u_h, U_h} (primal) or {w_h, W_h} (adjoint) with U_h = ξ u'_h.

    ``solver_residual`` is the largest relative residual ‖b - Ax‖/‖b‖ over the
    solves that produced the pair. Solver output is ``np.longdouble``.
    """

    first: np.ndarray
    second: np.ndarray
    xi: float
    role: Role
    solver_residual: float = 0.0

    def __post_init__(self) -> None:
        if self.first.shape != self.second.shape:
            raise ValueError(
                f"FieldPair halves differ in shape: {self.first.shape} vs "
                f"{self.second.shape}"
            )

    def derivative(self) -> np.ndarray:
        """u'_h = U_h / ξ."""
        if self.role is not Role.PRIMAL:
            raise ValueError("derivative() is defined for primal pairs only")
        return self.second / self.xi

    def adjoint_state(self) -> np.ndarray:
        """λ = ξ W_h, the solution of K λ = g."""
        if self.role is not Role.ADJOINT:
            raise ValueError("adjoint_state() is defined for adjoint pairs only")
        return self.xi * self.second
