"""
Mesh-refinement studies of sensitivity bounds.

For every (mesh, ξ) of a :class:`CaseConfig` a row is computed:

    assemble → solve primal/adjoint pairs → recover residual pairs → bounds

and compared against J_ref, the sensitivity computed on the reference mesh.
A failing stage is recorded in its row; only a bad config aborts a study.
"""

import logging
from dataclasses import dataclass, field
from math import isfinite, nan
from typing import Any

import numpy as np

from sensbounds.bounds import (
    BoundsReport,
    EstimatorError,
    quantity_bounds,
    sensitivity_bounds,
)
from sensbounds.equilibration import (
    EquilibriumError,
    LambdaRangeError,
    build_admissible_pair,
)
from sensbounds.forms import (
    MEMBRANE_MEAN,
    PORTAL_MEAN,
    LoadVariant,
    ParamProblem,
    assemble_qoi,
    build_frame_problem,
    build_membrane_problem,
)
from sensbounds.linalg import DEFAULT_REL_TOL, SolverError
from sensbounds.parameters import ModelKind
from sensbounds.sensitivity import SensitivitySystem, evaluate_qoi

from .CaseConfig import CaseConfig, CaseDefinition
from .StudyRunner import RowTask, StudyRunner

logger = logging.getLogger(__name__)

# Rows whose recovered fields miss equilibrium by more than this are kept in
# the output but left out of rate fits.
EQUILIBRIUM_GUARD = 1e-10
FIT_POINTS = 3

# Relative tolerance of the published reference values.
FRAME_SOFT_TOL = 0.05
MEMBRANE_SOFT_TOL = 0.01

ROW_ERRORS = (
    SolverError,
    EquilibriumError,
    LambdaRangeError,
    EstimatorError,
    ValueError,
)

CSV_COLUMNS = (
    "h",
    "xi",
    "J_h",
    "lower",
    "upper",
    "gap",
    "re_Jh",
    "re_gap",
    "solver_res",
    "equil_res",
)


@dataclass(slots=True, frozen=True)
class StudyRow:
    """
    One (h, ξ) point. ``error`` is empty for a row that completed; failed
    rows carry NaN numbers and the failure message.
    """

    h: float
    xi: float
    J_h: float
    lower: float
    upper: float
    gap: float
    re_Jh: float
    re_gap: float
    solver_res: float
    equil_res: float
    error: str = ""

    @classmethod
    def failed(cls, h: float, xi: float, error: str) -> "StudyRow":
        return cls(h, xi, nan, nan, nan, nan, nan, nan, nan, nan, error=error)

    @property
    def ok(self) -> bool:
        return not self.error

    @property
    def guarded(self) -> bool:
        """Completed and within the equilibrium guard; eligible for rate fits."""
        return self.ok and self.equil_res <= EQUILIBRIUM_GUARD

    def bracketed(self, j_ref: float) -> bool:
        return self.ok and self.lower <= j_ref <= self.upper

    def values(self) -> tuple[float, ...]:
        """Numbers in CSV column order."""
        return tuple(getattr(self, name) for name in CSV_COLUMNS)


@dataclass(slots=True, frozen=True)
class RateFit:
    """Fitted log-log slopes for one ξ; None where too few usable points."""

    xi: float
    gap: float | None
    re_Jh: float | None
    points: int


@dataclass(slots=True, frozen=True)
class StudyResult:
    case_id: str
    j_ref: float
    rows: tuple[StudyRow, ...]
    fitted_rates: tuple[RateFit, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def xi_values(self) -> list[float]:
        return sorted({row.xi for row in self.rows})

    def rows_for(self, xi: float) -> list[StudyRow]:
        return [row for row in self.rows if row.xi == xi]

    def violations(self) -> list[StudyRow]:
        """Rows that failed or whose bracket misses J_ref."""
        return [row for row in self.rows if not row.bracketed(self.j_ref)]

    @property
    def all_strict(self) -> bool:
        return bool(self.rows) and not self.violations()

    def unguarded(self) -> list[StudyRow]:
        """Completed rows whose equilibrium residual exceeds the guard."""
        return [row for row in self.rows if row.ok and not row.guarded]

    @property
    def passed(self) -> bool:
        """Strict everywhere and every row within the equilibrium guard."""
        return self.all_strict and not self.unguarded()

    def rate(self, xi: float) -> RateFit | None:
        for fit in self.fitted_rates:
            if fit.xi == xi:
                return fit
        return None


# ---------------------------------------------------------------------- #
# Rate fitting
# ---------------------------------------------------------------------- #


def fit_rate(h: list[float] | np.ndarray, y: list[float] | np.ndarray) -> float:
    """
    Least-squares slope of log y against log h.

    Raises:
        ValueError: fewer than three points, mismatched lengths, or a
            non-positive value.
    """
    h_arr = np.asarray(h, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if h_arr.shape != y_arr.shape:
        raise ValueError(f"h and y differ in length: {h_arr.size} vs {y_arr.size}")
    if h_arr.size < FIT_POINTS:
        raise ValueError(
            f"fit_rate needs at least {FIT_POINTS} points, got {h_arr.size}"
        )
    if np.any(h_arr <= 0.0) or np.any(y_arr <= 0.0) or not np.all(np.isfinite(y_arr)):
        raise ValueError(
            f"fit_rate needs positive finite values, got h={h_arr}, y={y_arr}"
        )
    slope, _ = np.polyfit(np.log(h_arr), np.log(y_arr), 1)
    return float(slope)


def fit_rates(rows: list[StudyRow] | tuple[StudyRow, ...]) -> tuple[RateFit, ...]:
    """Gap and RE(J_h) slopes over the finest guarded rows of each ξ."""
    fits = []
    for xi in sorted({row.xi for row in rows}):
        usable = sorted(
            (row for row in rows if row.xi == xi and row.guarded),
            key=lambda row: row.h,
        )[:FIT_POINTS]
        if len(usable) < FIT_POINTS:
            fits.append(RateFit(xi, None, None, len(usable)))
            continue
        h = [row.h for row in usable]
        fits.append(
            RateFit(
                xi=xi,
                gap=_try_fit(h, [row.gap for row in usable]),
                re_Jh=_try_fit(h, [row.re_Jh for row in usable]),
                points=len(usable),
            )
        )
    return tuple(fits)


def _try_fit(h: list[float], y: list[float]) -> float | None:
    try:
        return fit_rate(h, y)
    except ValueError:
        # RE(J_h) can hit exactly zero on meshes that reproduce J_ref.
        return None


# ---------------------------------------------------------------------- #
# Problems
# ---------------------------------------------------------------------- #


def build_case_problem(
    case: CaseDefinition,
    size: int,
    xi: float = 1.0,
    beta: tuple[float, float] | None = None,
    load_variant: LoadVariant = LoadVariant.BOUNDARY_F,
) -> ParamProblem:
    """The case's problem on a mesh of ``size`` divisions (frame) or cells."""
    if case.model is ModelKind.FRAME:
        return build_frame_problem(case.parameter, size, xi, beta=beta or PORTAL_MEAN)
    return build_membrane_problem(
        case.parameter,
        size,
        xi,
        beta=beta or MEMBRANE_MEAN,
        load_variant=load_variant,
    )


def admissible_problem(
    case: CaseDefinition,
    size: int,
    preferred: float = 1.0,
    load_variant: LoadVariant = LoadVariant.BOUNDARY_F,
) -> ParamProblem:
    """
    The problem at ``preferred`` ξ, or at half of xi_max when ``preferred``
    falls outside the admissible range. J(u'_h) does not depend on ξ.
    """
    sample = build_case_problem(case, size, xi=1e-6, load_variant=load_variant)
    xi_max = sample.xi_max
    return sample.with_xi(preferred if preferred < xi_max else 0.5 * xi_max)


def reference_value(config: CaseConfig) -> float:
    """J(u'_h) on the reference mesh."""
    case = config.case
    problem = admissible_problem(
        case, config.reference_mesh, config.xi_values[0], config.load_variant
    )
    system = SensitivitySystem(problem, rel_tol=config.solver_tol)
    qoi = assemble_qoi(problem, case.qoi)
    j_ref = evaluate_qoi(system.primal_pair(), qoi)
    logger.info(
        "Reference %s on mesh %d: J=%.12g (solver residual %.2e)",
        config.case_id,
        config.reference_mesh,
        j_ref,
        system.max_residual,
    )
    return j_ref


# ---------------------------------------------------------------------- #
# Rows
# ---------------------------------------------------------------------- #


def sensitivity_report(
    problem: ParamProblem,
    qoi_def: str,
    solver_tol: float = DEFAULT_REL_TOL,
) -> tuple[BoundsReport, float, float]:
    """
    Bounds on J(u') for one problem: (report, solver residual, equilibrium
    residual).
    """
    system = SensitivitySystem(problem, rel_tol=solver_tol)
    qoi = assemble_qoi(problem, qoi_def)
    primal = system.primal_pair()
    adjoint = system.adjoint_pair(qoi)
    j_h = evaluate_qoi(primal, qoi)

    residual_p = build_admissible_pair(problem, primal)
    residual_d = build_admissible_pair(problem, adjoint, qoi)
    report = sensitivity_bounds(
        residual_p,
        residual_d,
        j_h,
        problem,
        meta={"label": problem.label, "h": problem.mesh.h, "xi": problem.xi},
    )
    equil = max(residual_p.equilibrium_residual, residual_d.equilibrium_residual)
    return report, system.max_residual, equil


def evaluate_row(config: CaseConfig, task: RowTask, j_ref: float) -> StudyRow:
    case = config.case
    h = nan
    try:
        problem = build_case_problem(
            case, task.divisions, task.xi, load_variant=config.load_variant
        )
        h = problem.mesh.h
        report, solver_res, equil_res = sensitivity_report(
            problem, case.qoi, config.solver_tol
        )
    except ROW_ERRORS as exc:
        logger.error(
            "%s row (%d, xi=%g) failed: %s",
            config.case_id,
            task.divisions,
            task.xi,
            exc,
        )
        return StudyRow.failed(h, task.xi, f"{type(exc).__name__}: {exc}")

    scale = abs(j_ref)
    row = StudyRow(
        h=h,
        xi=task.xi,
        J_h=report.quantity_value,
        lower=report.lower,
        upper=report.upper,
        gap=report.gap,
        re_Jh=abs(j_ref - report.quantity_value) / scale,
        re_gap=report.gap / scale,
        solver_res=solver_res,
        equil_res=equil_res,
    )
    if not row.guarded:
        logger.error(
            "%s row h=%g xi=%g exceeds the equilibrium guard (%.2e); "
            "excluded from fits",
            config.case_id,
            h,
            task.xi,
            equil_res,
        )
    logger.info(
        "%s h=%.6g xi=%g: J_h=%.10g in [%.10g, %.10g]%s",
        config.case_id,
        h,
        task.xi,
        row.J_h,
        row.lower,
        row.upper,
        "" if row.bracketed(j_ref) else " (J_ref outside)",
    )
    return row


def _soft_target(config: CaseConfig, j_ref: float) -> dict[str, Any]:
    case = config.case
    if case.published_value is None:
        return {}
    tol = FRAME_SOFT_TOL if case.model is ModelKind.FRAME else MEMBRANE_SOFT_TOL
    rel = abs(j_ref - case.published_value) / abs(case.published_value)
    if rel > tol:
        logger.warning(
            "%s: J_ref=%.8g differs from the published %.8g by %.2f%%",
            config.case_id,
            j_ref,
            case.published_value,
            100.0 * rel,
        )
    return {
        "published_value": case.published_value,
        "published_rel_diff": rel,
        "published_ok": rel <= tol,
    }


def run_case(config: CaseConfig) -> StudyResult:
    """
    Run every (mesh, ξ) row of ``config`` and fit convergence rates.

    Rows come back sorted by h descending, then ξ; the result depends only
    on ``config``.
    """
    j_ref = reference_value(config)
    if not isfinite(j_ref) or j_ref == 0.0:
        raise ValueError(f"Reference value {j_ref} cannot normalize relative errors")

    runner: StudyRunner[StudyRow] = StudyRunner(
        lambda task: evaluate_row(config, task, j_ref), workers=config.workers
    )
    rows = runner.run(
        RowTask(n, xi) for n in config.mesh_sizes for xi in sorted(config.xi_values)
    )

    result = StudyResult(
        case_id=config.case_id,
        j_ref=j_ref,
        rows=tuple(rows),
        fitted_rates=fit_rates(rows),
        meta={"reference_mesh": config.reference_mesh, **_soft_target(config, j_ref)},
    )
    for fit in result.fitted_rates:
        if fit.gap is not None:
            logger.info("%s xi=%g: gap slope %.3f", config.case_id, fit.xi, fit.gap)
    return result


# ---------------------------------------------------------------------- #
# Plain quantity bounds
# ---------------------------------------------------------------------- #


def value_bounds(config: CaseConfig) -> list[tuple[float, BoundsReport]]:
    """Bounds on the quantity itself (not its derivative) on every study mesh."""
    case = config.case
    out = []
    for n in config.mesh_sizes:
        problem = admissible_problem(case, n, config.xi_values[0], config.load_variant)
        qoi = assemble_qoi(problem, case.qoi)
        report = quantity_bounds(problem, qoi, meta={"h": problem.mesh.h})
        logger.info(
            "%s value h=%.6g: Q_h=%.10g in [%.10g, %.10g]",
            config.case_id,
            problem.mesh.h,
            report.quantity_value,
            report.lower,
            report.upper,
        )
        out.append((problem.mesh.h, report))
    return out
