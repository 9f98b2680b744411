"""Block primal/adjoint sensitivity solves and the ξ admissibility check."""

from .FieldPair import FieldPair
from .SensitivitySystem import (
    SensitivitySystem,
    adjoint_state_value,
    evaluate_qoi,
    solve_adjoint_pair,
    solve_primal_pair,
)
from .XiValidation import XiValidation, validate_xi

__all__ = [
    "FieldPair",
    "SensitivitySystem",
    "XiValidation",
    "adjoint_state_value",
    "evaluate_qoi",
    "solve_adjoint_pair",
    "solve_primal_pair",
    "validate_xi",
]
