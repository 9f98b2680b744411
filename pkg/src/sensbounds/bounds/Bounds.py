"""
Strict bounds on a quantity of interest from two residual pairs.

With E_p, E_d the estimators of the primal and adjoint residual pairs and
C their cross term,

    J_h + ½ C - ½ E_p E_d  ≤  J  ≤  J_h + ½ C + ½ E_p E_d

For sensitivities J_h = J(u'_h) and the pairs are the block residual pairs;
for a plain quantity the pairs are single-field (uncoupled) residuals.
"""

import logging
from dataclasses import dataclass, field
from math import inf, isfinite, nan, sqrt
from typing import Any

from sensbounds.equilibration import (
    AdmissibleResidualPair,
    qoi_load,
    single_field_residual,
)
from sensbounds.forms import ParamProblem, QoI, assemble_load, assemble_operator
from sensbounds.linalg import factorize
from sensbounds.parameters import Role

from .Estimator import cre_estimator, cross_term

logger = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class BoundsReport:
    """
    A bracket [lower, upper] around one quantity.

    ``gap`` is stored rather than recomputed from upper - lower, so it is
    exactly E_p·E_d.
    """

    quantity_value: float
    correction: float
    e_primal: float
    e_dual: float
    upper: float
    lower: float
    kappa: float
    gap: float
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.lower <= self.upper:
            raise ValueError(f"lower={self.lower} exceeds upper={self.upper}")

    @property
    def center(self) -> float:
        return self.quantity_value + self.correction

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def optimal_kappa(e_p: float, e_d: float) -> float:
    """
    κ = sqrt(e_d / e_p), which makes ½(κ² e_p² + e_d²/κ²) equal e_p·e_d.

    Returns inf when only e_p vanishes and nan when both do; the bounds
    then collapse and κ is not used.
    """
    if e_p < 0.0 or e_d < 0.0:
        raise ValueError(f"Estimators must be non-negative, got {e_p}, {e_d}")
    if e_p == 0.0:
        return nan if e_d == 0.0 else inf
    return sqrt(e_d / e_p)


def _report(
    value: float, cross: float, e_p: float, e_d: float, meta: dict[str, Any] | None
) -> BoundsReport:
    gap = e_p * e_d
    correction = 0.5 * cross
    kappa = optimal_kappa(e_p, e_d)
    report = BoundsReport(
        quantity_value=value,
        correction=correction,
        e_primal=e_p,
        e_dual=e_d,
        upper=value + correction + 0.5 * gap,
        lower=value + correction - 0.5 * gap,
        kappa=kappa,
        gap=gap,
        meta=dict(meta or {}),
    )
    if isfinite(kappa):
        logger.debug(
            "Bounds [%.10g, %.10g] around %.10g (kappa %.4g)",
            report.lower,
            report.upper,
            value,
            kappa,
        )
    return report


def sensitivity_bounds(
    pair_p: AdmissibleResidualPair,
    pair_d: AdmissibleResidualPair,
    j_h: float,
    problem: ParamProblem | None = None,
    meta: dict[str, Any] | None = None,
) -> BoundsReport:
    """Bounds on J(u') from the block primal and adjoint residual pairs."""
    if pair_p.role is not Role.PRIMAL or pair_d.role is not Role.ADJOINT:
        raise ValueError("sensitivity_bounds needs (primal, adjoint) residual pairs")
    e_p = cre_estimator(pair_p, problem).value
    e_d = cre_estimator(pair_d, problem).value
    cross = cross_term(pair_p, pair_d, problem)
    return _report(j_h, cross, e_p, e_d, meta)


def symmetric_bounds(
    residual_p: AdmissibleResidualPair,
    residual_d: AdmissibleResidualPair,
    q_h: float,
    meta: dict[str, Any] | None = None,
) -> BoundsReport:
    """
    Bounds on Q(u) for a single-field problem.

    ``residual_p`` holds σ̂_h - σ(u_h) and ``residual_d`` holds τ̂_h - σ(ũ_h),
    both uncoupled (see :func:`single_field_residual`).
    """
    for r in (residual_p, residual_d):
        if r.coupling.xi != 0.0:
            raise ValueError("symmetric_bounds needs uncoupled single-field residuals")
    e_p = cre_estimator(residual_p).value
    e_d = cre_estimator(residual_d).value
    cross = cross_term(residual_p, residual_d)
    return _report(q_h, cross, e_p, e_d, meta)


def quantity_bounds(
    problem: ParamProblem, qoi: QoI, meta: dict[str, Any] | None = None
) -> BoundsReport:
    """
    Bounds on Q(u) = gᵀu itself: solves K u = f and K ũ = g, recovers both
    admissible fields and applies :func:`symmetric_bounds`.
    """
    factor = factorize(assemble_operator(problem, "K"))
    u = factor.solve(assemble_load(problem, "f"))
    u_adj = factor.solve(qoi.extraction_vector)
    residual_p = single_field_residual(problem, u, problem.load, Role.PRIMAL)
    residual_d = single_field_residual(
        problem, u_adj, qoi_load(problem, qoi), Role.ADJOINT
    )
    return symmetric_bounds(residual_p, residual_d, qoi(u), meta)
