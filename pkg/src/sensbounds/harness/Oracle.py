"""
Finite-difference check of a computed sensitivity.

The quantity Q(β) = gᵀu_h(β) is re-solved on the reference mesh at β̄ ± δ
for each δ; central differences are Richardson-extrapolated to δ → 0 and
compared with J(u'_h) from the block primal solve.
"""

import logging
from dataclasses import dataclass, field, replace
from math import isclose

import numpy as np

from sensbounds.forms import (
    MEMBRANE_MEAN,
    LoadVariant,
    assemble_load,
    assemble_operator,
    assemble_qoi,
)
from sensbounds.linalg import solve_spd
from sensbounds.parameters import ModelKind, Parameter

from .CaseConfig import CaseConfig, CaseDefinition
from .Study import build_case_problem, reference_value

logger = logging.getLogger(__name__)

ORACLE_TOL = 0.005
# Relative change of the extrapolate when the largest δ is dropped.
NOISE_TOL = 1e-3

# Error powers of a central difference. The membrane β₂ quantity is only
# piecewise smooth in β₂ (its curvature jumps where a load edge meets a mesh
# line), so its error series starts at δ.
SMOOTH_POWERS = (2, 4, 6)
KINKED_POWERS = (1, 2, 3)

# Largest membrane β₂ step as a fraction of the mean half-width; the shifted
# load region keeps at least half its size.
MAX_STEP_FRACTION = 0.5


@dataclass(slots=True, frozen=True)
class OracleResult:
    case_id: str
    fd_value: float
    j_ref: float
    deltas: tuple[float, ...]
    estimates: tuple[float, ...]
    spread: float
    # J_ref per membrane β₂ load variant; empty for other cases.
    variants: dict[str, float] = field(default_factory=dict)

    @property
    def relative_difference(self) -> float:
        return abs(self.fd_value - self.j_ref) / abs(self.j_ref)

    @property
    def noisy(self) -> bool:
        return self.spread > NOISE_TOL

    def agrees(self, tol: float = ORACLE_TOL) -> bool:
        return self.relative_difference <= tol


def _is_kinked(case: CaseDefinition) -> bool:
    return case.model is ModelKind.MEMBRANE and case.parameter is Parameter.BETA2


def oracle_deltas(
    config: CaseConfig, deltas: tuple[float, ...] | None = None
) -> tuple[float, ...]:
    """
    The δ list to use. Membrane β₂ steps must be whole multiples of the
    reference h so the shifted load region stays on mesh lines, and at most
    half the mean half-width β̄₂. They default to those of (h, 2h, 4h)
    within that limit.

    Raises:
        ValueError: a given step is off the mesh lines or too large, or no
            default step fits on a coarse reference mesh.
    """
    case = config.case
    if not _is_kinked(case):
        return tuple(deltas or config.fd_deltas)

    h = 1.0 / config.reference_mesh
    limit = MAX_STEP_FRACTION * MEMBRANE_MEAN[1]
    fits = limit * (1 + 1e-12)
    if deltas is None:
        ladder = tuple(m * h for m in (1.0, 2.0, 4.0) if m * h <= fits)
        if not ladder:
            raise ValueError(
                f"Reference mesh {config.reference_mesh} is too coarse for a "
                f"membrane beta2 step: h={h:g} > {limit:g}"
            )
        return ladder
    for d in deltas:
        steps = d / h
        if not isclose(steps, round(steps), abs_tol=1e-9) or round(steps) < 1:
            raise ValueError(
                f"delta={d} is not a multiple of the reference h={h:g}; the load "
                "region would leave the mesh lines"
            )
        if d > fits:
            raise ValueError(
                f"delta={d} exceeds {limit:g}, half the mean load half-width"
            )
    return tuple(deltas)


def richardson(
    deltas: tuple[float, ...] | list[float],
    estimates: tuple[float, ...] | list[float],
    powers: tuple[int, ...] = SMOOTH_POWERS,
) -> float:
    """
    Extrapolate D(δ) = D₀ + Σ cⱼ δ^pⱼ to δ = 0, using as many correction
    terms as the data allow (least squares beyond that).
    """
    if len(deltas) != len(estimates) or not deltas:
        raise ValueError("richardson needs one estimate per delta")
    d = np.asarray(deltas, dtype=float)
    terms = powers[: len(deltas) - 1]
    A = np.column_stack([np.ones_like(d)] + [d**p for p in terms])
    coef, *_ = np.linalg.lstsq(A, np.asarray(estimates, dtype=float), rcond=None)
    return float(coef[0])


def quantity_at(
    config: CaseConfig,
    beta: tuple[float, float],
    load_variant: LoadVariant | None = None,
) -> float:
    """Q(β) = gᵀu_h(β) on the reference mesh."""
    problem = build_case_problem(
        config.case,
        config.reference_mesh,
        xi=1e-6,
        beta=beta,
        load_variant=load_variant or config.load_variant,
    )
    K = assemble_operator(problem, "K")
    u = solve_spd(K, assemble_load(problem, "f"), rel_tol=config.solver_tol)
    return assemble_qoi(problem, config.case.qoi)(u)


def _mean_values(config: CaseConfig) -> tuple[float, float]:
    nominal = build_case_problem(config.case, config.reference_mesh, xi=1e-6)
    return nominal.mean_values


def fd_oracle(
    config: CaseConfig, deltas: tuple[float, ...] | None = None
) -> OracleResult:
    """
    Central-difference estimate of ∂Q/∂β on the reference mesh, reported
    alongside J_ref. A Richardson extrapolate that moves by more than
    NOISE_TOL when the largest δ is dropped is flagged as noisy.
    """
    case = config.case
    steps = oracle_deltas(config, deltas)
    beta = _mean_values(config)
    index = case.parameter.index

    def shifted(sign: float, d: float) -> tuple[float, float]:
        values = list(beta)
        values[index] += sign * d
        return (values[0], values[1])

    estimates = tuple(
        (quantity_at(config, shifted(1.0, d)) - quantity_at(config, shifted(-1.0, d)))
        / (2.0 * d)
        for d in steps
    )
    powers = KINKED_POWERS if _is_kinked(case) else SMOOTH_POWERS
    fd_value = richardson(steps, estimates, powers)

    spread = 0.0
    if len(steps) > 2:
        order = np.argsort(steps)[:-1]
        reduced = richardson(
            [steps[i] for i in order], [estimates[i] for i in order], powers
        )
        spread = abs(fd_value - reduced) / max(abs(fd_value), np.finfo(float).tiny)

    variants: dict[str, float] = {}
    if _is_kinked(case):
        for variant in LoadVariant:
            variant_config = replace(config, load_variant=variant)
            variants[variant.value] = reference_value(variant_config)
        j_ref = variants[config.load_variant.value]
    else:
        j_ref = reference_value(config)

    result = OracleResult(
        case_id=config.case_id,
        fd_value=fd_value,
        j_ref=j_ref,
        deltas=steps,
        estimates=estimates,
        spread=spread,
        variants=variants,
    )
    if result.noisy:
        logger.warning(
            "%s: Richardson extrapolate moves by %.2e "
            "when the largest delta is dropped",
            config.case_id,
            spread,
        )
    logger.info(
        "%s oracle: FD %.10g vs J_ref %.10g (%.3e relative)",
        config.case_id,
        fd_value,
        j_ref,
        result.relative_difference,
    )
    return result
