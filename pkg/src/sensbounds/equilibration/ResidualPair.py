"""
Admissible residual pairs for the block primal and adjoint solutions.

Block stresses of a pair (K' the parameter derivative of the stiffness):

    primal   A₁ = K u_h              load f
             A₂ = K U_h + ξ K' u_h   load ξ f'
    adjoint  A₁ = K w_h + ξ K' W_h   load 0
             A₂ = K W_h              load J / ξ

Each Aᵢ is equilibrated against its load; the differences sᵢ = σ̂ᵢ - Aᵢ
form the transformed residual pair.
"""

import logging

import numpy as np

from sensbounds.forms import (
    BeamLoad,
    MembraneLoad,
    ParamProblem,
    QoI,
    ResolvedBeamLoad,
)
from sensbounds.mesh import Mesh1D, Mesh2D
from sensbounds.parameters import ModelKind, Role
from sensbounds.sensitivity import FieldPair

from .BeamRecovery import (
    NODAL_TOL,
    beam_fe_stress,
    element_actions,
    nodal_defect,
    recover_beam_moments,
)
from .FluxRecovery import (
    FLUX_TOL,
    flux_defect,
    membrane_fe_stress,
    nodal_flux_actions,
    recover_quad_flux,
)
from .StressField import (
    AdmissibleResidualPair,
    Coupling,
    EquilibriumError,
    LambdaRangeError,
    StressField,
)

logger = logging.getLogger(__name__)

Load = BeamLoad | ResolvedBeamLoad | MembraneLoad


def fe_stress(
    problem: ParamProblem, coeffs: np.ndarray, prime: bool = False
) -> StressField:
    """K u_h as a stress field, or K' u_h with ``prime``."""
    if isinstance(problem.mesh, Mesh1D):
        return beam_fe_stress(problem.mesh, coeffs, prime=prime)
    c = problem.coefficients
    assert c is not None
    if prime:
        return membrane_fe_stress(problem.mesh, coeffs, c.a_prime, c.k_prime)
    return membrane_fe_stress(problem.mesh, coeffs, c.a, c.k)


def block_stresses(
    problem: ParamProblem, pair: FieldPair
) -> tuple[StressField, StressField]:
    xi = pair.xi
    if pair.role is Role.PRIMAL:
        first = fe_stress(problem, pair.first)
        second = fe_stress(problem, pair.second)
        if problem.has_stiffness_derivative:
            second = second + fe_stress(problem, pair.first, prime=True).scaled(xi)
        return first, second

    first = fe_stress(problem, pair.first)
    second = fe_stress(problem, pair.second)
    if problem.has_stiffness_derivative:
        first = first + fe_stress(problem, pair.second, prime=True).scaled(xi)
    return first, second


def qoi_load(problem: ParamProblem, qoi: QoI, factor: float = 1.0) -> Load:
    """``factor`` · J written as a load on the problem's mesh."""
    if qoi.load is not None:
        return qoi.load.scaled(factor)
    if isinstance(problem.mesh, Mesh1D):
        return ResolvedBeamLoad(
            q=np.zeros(len(problem.mesh.elements)),
            nodal=factor * qoi.extraction_vector,
        )
    raise ValueError(
        f"QoI {qoi.label!r} has no load form; membrane equilibration needs one"
    )


def block_loads(
    problem: ParamProblem, pair: FieldPair, qoi: QoI | None = None
) -> tuple[Load, Load]:
    xi = pair.xi
    if pair.role is Role.PRIMAL:
        return problem.load, problem.load_prime.scaled(xi)
    if qoi is None:
        raise ValueError("An adjoint residual pair needs its QoI")
    zero: Load = BeamLoad() if problem.model is ModelKind.FRAME else MembraneLoad()
    return zero, qoi_load(problem, qoi, 1.0 / xi)


def recover(problem: ParamProblem, stress: StressField, load: Load) -> StressField:
    """Statically admissible field balancing ``load``, driven by ``stress``."""
    mesh = problem.mesh
    if isinstance(mesh, Mesh1D):
        assert not isinstance(load, MembraneLoad)
        return recover_beam_moments(mesh, stress, load)
    assert isinstance(load, MembraneLoad)
    return recover_quad_flux(mesh, stress, load)


def equilibrium_residual(
    problem: ParamProblem, field: StressField, load: Load
) -> float:
    """Relative equilibrium defect of a recovered field."""
    mesh = problem.mesh
    if isinstance(mesh, Mesh1D):
        assert not isinstance(load, MembraneLoad)
        defect, scale = nodal_defect(mesh, field, load)
    else:
        assert isinstance(load, MembraneLoad)
        defect, scale = flux_defect(mesh, field, load)
    return defect / scale


def check_lambda(coupling: Coupling) -> float:
    peak = coupling.max_abs()
    if peak >= 1.0:
        raise LambdaRangeError(
            f"|λ| reaches {peak:.6g} at xi={coupling.xi}; the residual transform "
            "needs |λ| < 1"
        )
    return peak


def build_admissible_pair(
    problem: ParamProblem, pair: FieldPair, qoi: QoI | None = None
) -> AdmissibleResidualPair:
    """
    Equilibrate both block stresses of ``pair`` and return the transformed
    residual pair (s₁, s₂). Adjoint pairs need the ``qoi`` they were solved for.

    Raises:
        LambdaRangeError: |λ| ≥ 1 somewhere at this ξ.
        EquilibriumError: a recovered field failed its equilibrium check.
    """
    coupling = Coupling.from_problem(problem)
    check_lambda(coupling)

    stresses = block_stresses(problem, pair)
    loads = block_loads(problem, pair, qoi)
    residuals = []
    worst = 0.0
    for stress, load in zip(stresses, loads):
        recovered = recover(problem, stress, load)
        worst = max(worst, equilibrium_residual(problem, recovered, load))
        residuals.append(recovered - stress)

    logger.debug(
        "%s residual pair for %s: equilibrium %.2e",
        pair.role.value,
        problem.label or problem.model.value,
        worst,
    )
    return AdmissibleResidualPair(
        first=residuals[0],
        second=residuals[1],
        coupling=coupling,
        role=pair.role,
        equilibrium_residual=worst,
    )


def single_field_residual(
    problem: ParamProblem, coeffs: np.ndarray, load: Load, role: Role = Role.PRIMAL
) -> AdmissibleResidualPair:
    """
    σ̂ - K u_h for one field solved with K alone, packed as an uncoupled
    pair with a zero second half.
    """
    stress = fe_stress(problem, coeffs)
    recovered = recover(problem, stress, load)
    n = problem.mesh.n_cells if isinstance(problem.mesh, Mesh2D) else len(
        problem.mesh.elements
    )
    return AdmissibleResidualPair(
        first=recovered - stress,
        second=StressField.zeros(problem.model, n),
        coupling=Coupling.uncoupled(problem),
        role=role,
        equilibrium_residual=equilibrium_residual(problem, recovered, load),
    )


# ---------------------------------------------------------------------- #
# Verification
# ---------------------------------------------------------------------- #


def _nodal_actions(problem: ParamProblem, field: StressField) -> np.ndarray:
    mesh = problem.mesh
    if isinstance(mesh, Mesh2D):
        return nodal_flux_actions(mesh, field)
    out = np.zeros(mesh.n_free)
    actions = element_actions(mesh, field)
    for e, el in enumerate(mesh.elements):
        if el.dofs.size:
            np.add.at(out, el.dofs, el.transform.T @ actions[e])
    return out


def galerkin_defect(
    problem: ParamProblem, pair: FieldPair, residual: AdmissibleResidualPair
) -> float:
    """
    Largest FE-basis action of s₁ and s₂ relative to that of the block
    stresses. The residual functionals vanish on the FE space, so this is
    at solver-residual level for a correct pair.
    """

    def peak(field: StressField) -> float:
        return float(np.max(np.abs(_nodal_actions(problem, field)), initial=0.0))

    scale = max(peak(stress) for stress in block_stresses(problem, pair))
    defect = max(peak(residual.first), peak(residual.second))
    return defect / scale if scale > 0.0 else defect


def verify_pair(
    problem: ParamProblem,
    pair: FieldPair,
    residual: AdmissibleResidualPair,
    tol: float | None = None,
) -> float:
    """:func:`galerkin_defect`, raising EquilibriumError above ``tol``."""
    if tol is None:
        tol = NODAL_TOL if problem.model is ModelKind.FRAME else FLUX_TOL
    defect = galerkin_defect(problem, pair, residual)
    if defect > tol:
        raise EquilibriumError(
            f"{pair.role.value} residual pair fails Galerkin orthogonality: "
            f"{defect:.3e}",
            defect=defect,
        )
    return defect
