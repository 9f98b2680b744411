"""
Hermite-cubic bending elements and the portal-frame model problem.

On an element of length h with x ∈ [0, h] and t = x/h the local DOFs are
(w_a, θ_a, w_b, θ_b) and the shape functions are

    N1 = 1 - 3t² + 2t³        N2 = h (t - 2t² + t³)
    N3 = 3t² - 2t³            N4 = h (-t² + t³)

The bending form is ∫ EI v″ w″ and the moment is M = EI w″.
"""

import logging

import numpy as np
from numpy.polynomial import polynomial as P

from sensbounds.linalg import SymSparse
from sensbounds.mesh import (
    Element,
    FrameGeometry,
    Mesh1D,
    StiffnessProfile,
    build_frame_mesh,
    gauss_rule,
)
from sensbounds.parameters import ModelKind, Parameter

from .models import BeamLoad, ElementMatrices, ParamProblem, PointLoad, QoI

logger = logging.getLogger(__name__)

PORTAL_MEAN = (1.0, 1.0)


# ---------------------------------------------------------------------- #
# Shape functions
# ---------------------------------------------------------------------- #


def hermite_values(x: np.ndarray, h: float) -> np.ndarray:
    """(len(x), 4) values of N1..N4 at local positions x ∈ [0, h]."""
    t = np.asarray(x, dtype=float) / h
    return np.column_stack(
        [
            1.0 - 3.0 * t**2 + 2.0 * t**3,
            h * (t - 2.0 * t**2 + t**3),
            3.0 * t**2 - 2.0 * t**3,
            h * (-(t**2) + t**3),
        ]
    )


def hermite_second(x: np.ndarray, h: float) -> np.ndarray:
    """(len(x), 4) second derivatives N1″..N4″."""
    t = np.asarray(x, dtype=float) / h
    return np.column_stack(
        [
            (-6.0 + 12.0 * t) / h**2,
            (-4.0 + 6.0 * t) / h,
            (6.0 - 12.0 * t) / h**2,
            (-2.0 + 6.0 * t) / h,
        ]
    )


def curvature_polynomial(d: np.ndarray, h: float) -> np.ndarray:
    """Ascending coefficients in x of w″ for local DOFs ``d``."""
    c0 = (-6.0 * d[0] - 4.0 * h * d[1] + 6.0 * d[2] - 2.0 * h * d[3]) / h**2
    c1 = (12.0 * d[0] + 6.0 * h * d[1] - 12.0 * d[2] + 6.0 * h * d[3]) / h**3
    return np.array([c0, c1])


def consistent_load(q: float, h: float) -> np.ndarray:
    """Element load vector of a uniform transverse density q."""
    return q * h * np.array([0.5, h / 12.0, 0.5, -h / 12.0])


# ---------------------------------------------------------------------- #
# Element matrices
# ---------------------------------------------------------------------- #


def element_beam(
    element: Element,
    profile: StiffnessProfile,
    q: float = 0.0,
    q_prime: float = 0.0,
) -> ElementMatrices:
    h = element.length
    if h <= 0.0:
        raise ValueError(f"Element length must be positive, got {h}")

    ei, ei_prime = profile.local(element.s_a)
    degree = max(len(ei), len(ei_prime)) - 1 + 2
    rule = gauss_rule(max(2, (degree + 2) // 2), dim=1)
    x, w = rule.on_interval(0.0, h)

    B = hermite_second(x, h)
    stiffness = B.T @ (w[:, None] * P.polyval(x, ei)[:, None] * B)
    stiffness_prime = B.T @ (w[:, None] * P.polyval(x, ei_prime)[:, None] * B)
    return ElementMatrices(
        stiffness=0.5 * (stiffness + stiffness.T),
        stiffness_prime=0.5 * (stiffness_prime + stiffness_prime.T),
        load=consistent_load(q, h),
        load_prime=consistent_load(q_prime, h),
    )


def frame_element_matrices(
    problem: ParamProblem,
) -> list[tuple[Element, ElementMatrices]]:
    mesh = problem.mesh
    assert isinstance(mesh, Mesh1D)
    q = problem.load.resolve(mesh).q
    q_prime = problem.load_prime.resolve(mesh).q
    result = []
    for e, element in enumerate(mesh.elements):
        profile = mesh.members[element.member].stiffness_profile
        result.append((element, element_beam(element, profile, q[e], q_prime[e])))
    return result


# ---------------------------------------------------------------------- #
# Assembly
# ---------------------------------------------------------------------- #


def assemble_frame_matrix(mesh: Mesh1D, local: list[np.ndarray]) -> SymSparse:
    """Assemble Tᵀ k T over elements; ``local`` holds one 4×4 matrix per element."""
    rows, cols, vals = [], [], []
    for element, k in zip(mesh.elements, local):
        if element.dofs.size == 0:
            continue
        T = element.transform
        kg = T.T @ k @ T
        m = element.dofs.size
        rows.append(np.repeat(element.dofs, m))
        cols.append(np.tile(element.dofs, m))
        vals.append(kg.ravel())
    if not rows:
        return SymSparse.zeros(mesh.n_free)
    return SymSparse.from_coo(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), mesh.n_free
    )


def assemble_frame_vector(mesh: Mesh1D, local: list[np.ndarray]) -> np.ndarray:
    out = np.zeros(mesh.n_free)
    for element, f in zip(mesh.elements, local):
        if element.dofs.size:
            np.add.at(out, element.dofs, element.transform.T @ f)
    return out


def assemble_frame_load(mesh: Mesh1D, load: BeamLoad) -> np.ndarray:
    resolved = load.resolve(mesh)
    local = [
        consistent_load(resolved.q[e], el.length)
        for e, el in enumerate(mesh.elements)
    ]
    return assemble_frame_vector(mesh, local) + resolved.nodal


# ---------------------------------------------------------------------- #
# Portal frame model problem
# ---------------------------------------------------------------------- #


def build_frame_problem(
    parameter: Parameter,
    divisions: int,
    xi: float = 1.0,
    beta: tuple[float, float] = PORTAL_MEAN,
    q0: float = 1.0,
    length: float = 1.0,
    ei0: float = 1.0,
) -> ParamProblem:
    """
    The portal frame at parameter values ``beta`` = (β₁, β₂).

    β₁ scales the beam stiffness (EI_BC = β₁ EI₀); β₂ scales the beam's
    gravity load (β₂² q₀). A horizontal P₀ = q₀ l acts at C.
    """
    beta1, beta2 = beta
    geometry = FrameGeometry.portal(
        length=length,
        ei0=ei0,
        beta1=beta1,
        beam_ei_prime=ei0 if parameter is Parameter.BETA1 else 0.0,
    )
    mesh = build_frame_mesh(geometry, divisions)

    load = BeamLoad(
        distributed=(("BC", -(beta2**2) * q0),),
        points=(PointLoad("C", fx=q0 * length),),
    )
    if parameter is Parameter.BETA2:
        load_prime = BeamLoad(distributed=(("BC", -2.0 * beta2 * q0),))
    else:
        load_prime = BeamLoad()

    return ParamProblem(
        model=ModelKind.FRAME,
        parameter=parameter,
        mean_values=(beta1, beta2),
        xi=xi,
        mesh=mesh,
        load=load,
        load_prime=load_prime,
        label=f"frame-{parameter.value}",
    )


FRAME_QOIS = {
    "Delta_C": ("sway", "sway displacement at C"),
    "theta_B": ("rotation:B", "clockwise rotation at B"),
}


def frame_qoi(mesh: Mesh1D, target: str) -> QoI:
    """
    Point-DOF quantity of interest.

    ``target`` is a named DOF ("sway", "rotation:B", ...), one of the aliases
    in ``FRAME_QOIS``, or "member@s:component" for an interior node
    (component "w" or "theta").
    """
    if target in FRAME_QOIS:
        target = FRAME_QOIS[target][0]

    if "@" in target:
        member, rest = target.split("@", 1)
        s, component = rest.split(":", 1)
        g = mesh.point_dof(member, float(s), component)
        load = None
    else:
        g = mesh.unit_vector(target)
        load = BeamLoad(dof_forces=((target, 1.0),))
    return QoI(kind="point-dof", label=target, extraction_vector=g, load=load)
