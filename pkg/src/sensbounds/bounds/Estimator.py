"""
Constitutive-relation-error norms of residual pairs.

For a transformed pair (s₁, s₂) with residual pair (p₁, p₂) the squared
norm is

    E² = ∫ (p₁² + p₂² + 2λ p₁ p₂) / K

and the cross term of two pairs is the matching bilinear form. Beam
integrals use 1/EI weights; membrane integrals split into a flux part
(1/a) and a reaction part (1/k), each with its own λ.
"""

import logging
from dataclasses import dataclass
from math import sqrt
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from sensbounds.equilibration import (
    AdmissibleResidualPair,
    Coupling,
    StressField,
    beam_energy_parts,
    beam_fe_stress,
    membrane_energy_parts,
    single_field_residual,
)
from sensbounds.forms import BeamLoad, MembraneLoad, ParamProblem, ResolvedBeamLoad
from sensbounds.mesh import Mesh1D, Mesh2D, gauss_rule

logger = logging.getLogger(__name__)

# Negative E² within this fraction of the summed part magnitudes is round-off.
ROUNDOFF = 1e-12


class EstimatorError(RuntimeError):
    """A squared estimator came out negative beyond round-off."""


@dataclass(slots=True, frozen=True)
class EstimatorValue:
    """E and its (first-field, second-field, cross) contributions to E²."""

    value: float
    parts: tuple[float, float, float]

    @property
    def squared(self) -> float:
        return sum(self.parts)


def _same_mesh(a: Mesh1D | Mesh2D, b: Mesh1D | Mesh2D) -> bool:
    if a is b:
        return True
    if isinstance(a, Mesh2D) and isinstance(b, Mesh2D):
        return a == b
    if isinstance(a, Mesh1D) and isinstance(b, Mesh1D):
        return len(a.elements) == len(b.elements) and all(
            x.member == y.member and x.s_a == y.s_a and x.s_b == y.s_b
            for x, y in zip(a.elements, b.elements)
        )
    return False


def energy_parts(
    coupling: Coupling,
    p: tuple[StressField, StressField],
    d: tuple[StressField, StressField],
) -> tuple[float, float, float]:
    mesh = coupling.mesh
    if isinstance(mesh, Mesh1D):
        return beam_energy_parts(mesh, coupling, p, d)
    return membrane_energy_parts(mesh, coupling, p, d)


def _check_problem(pair: AdmissibleResidualPair, problem: ParamProblem | None) -> None:
    if problem is not None and not _same_mesh(pair.coupling.mesh, problem.mesh):
        raise ValueError("Residual pair and problem live on different meshes")


def cre_estimator(
    pair: AdmissibleResidualPair, problem: ParamProblem | None = None
) -> EstimatorValue:
    """
    E of a residual pair.

    Raises:
        EstimatorError: E² < 0 beyond round-off (ξ outside the coercive range
            or an integration fault).
    """
    _check_problem(pair, problem)
    fields = (pair.first, pair.second)
    parts = energy_parts(pair.coupling, fields, fields)
    squared = sum(parts)
    if squared < 0.0:
        magnitude = sum(abs(x) for x in parts)
        if squared < -ROUNDOFF * magnitude:
            raise EstimatorError(
                f"Negative squared estimator {squared:.6e} at xi={pair.coupling.xi}"
            )
        squared = 0.0
    return EstimatorValue(value=sqrt(squared), parts=parts)


def cross_term(
    pair_p: AdmissibleResidualPair,
    pair_d: AdmissibleResidualPair,
    problem: ParamProblem | None = None,
) -> float:
    """The coupled product of a primal and an adjoint residual pair."""
    if not _same_mesh(pair_p.coupling.mesh, pair_d.coupling.mesh):
        raise ValueError("cross_term needs both pairs on the same mesh")
    if pair_p.coupling.xi != pair_d.coupling.xi:
        raise ValueError(
            f"cross_term needs one coupling, got xi={pair_p.coupling.xi} and "
            f"xi={pair_d.coupling.xi}"
        )
    _check_problem(pair_p, problem)
    parts = energy_parts(
        pair_p.coupling, (pair_p.first, pair_p.second), (pair_d.first, pair_d.second)
    )
    return float(sum(parts))


# ---------------------------------------------------------------------- #
# Single-field helpers
# ---------------------------------------------------------------------- #


def energy_error_bound(
    problem: ParamProblem,
    coeffs: np.ndarray,
    load: BeamLoad | ResolvedBeamLoad | MembraneLoad | None = None,
) -> float:
    """
    e_CRE(u_h, σ̂_h): an upper bound of the energy-norm error of a
    single-field FE solution ``coeffs`` under ``load`` (default: the
    problem's own load).
    """
    residual = single_field_residual(
        problem, coeffs, problem.load if load is None else load
    )
    return cre_estimator(residual).value


def prager_synge_terms(
    mesh: Mesh1D,
    stress: StressField,
    coeffs: np.ndarray,
    exact_moment: Callable[[int, np.ndarray], np.ndarray],
) -> tuple[float, float, float]:
    """
    (e²_CRE, ‖σ̂ - σ‖², ‖û - u‖²) on a frame mesh, for an admissible
    moment field ``stress``, an admissible deflection ``coeffs`` and the exact
    moment ``exact_moment(member, s)``.

    All three use 1/EI weights (the deflection error through
    EI û″ - M); the first equals the sum of the other two.
    """
    fe = beam_fe_stress(mesh, coeffs)
    width = max(stress.flux.shape[1], fe.flux.shape[1])
    cre = stress_err = disp_err = 0.0
    for e, el in enumerate(mesh.elements):
        profile = mesh.members[el.member].stiffness_profile
        order = min(profile.rule_order(el.s_a, el.s_b, 2 * width + 4) + 4, 30)
        x, w = gauss_rule(order, dim=1).on_interval(0.0, el.length)
        weight = w / profile.value(el.s_a + x)
        m_hat = P.polyval(x, stress.flux[e])
        m_h = P.polyval(x, fe.flux[e])
        m = np.asarray(exact_moment(el.member, el.s_a + x), dtype=float)
        cre += float(weight @ (m_hat - m_h) ** 2)
        stress_err += float(weight @ (m_hat - m) ** 2)
        disp_err += float(weight @ (m_h - m) ** 2)
    return cre, stress_err, disp_err
