"""CRE estimators, the coupled cross term and strict quantity bounds."""

from .Bounds import (
    BoundsReport,
    optimal_kappa,
    quantity_bounds,
    sensitivity_bounds,
    symmetric_bounds,
)
from .Estimator import (
    EstimatorError,
    EstimatorValue,
    cre_estimator,
    cross_term,
    energy_error_bound,
    energy_parts,
    prager_synge_terms,
)

__all__ = [
    "BoundsReport",
    "EstimatorError",
    "EstimatorValue",
    "cre_estimator",
    "cross_term",
    "energy_error_bound",
    "energy_parts",
    "optimal_kappa",
    "prager_synge_terms",
    "quantity_bounds",
    "sensitivity_bounds",
    "symmetric_bounds",
]
