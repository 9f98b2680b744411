"""
Bilinear quadrilateral elements and the membrane-on-elastic-foundation problem.

    ∫ a ∇u·∇v + ∫ k u v = ∫_{Ω_f} v    on Ω = (0, 1)², no Dirichlet data

with a = β₁, k = 1 and Ω_f = (0.5 - β₂, 0.5 + β₂)². The quantity of
interest is the average of u over Ω_QoI = (0.5, 0.625)².
"""

import logging

import numpy as np

from sensbounds.linalg import SymSparse
from sensbounds.mesh import Box, Mesh2D, build_quad_mesh, gauss_rule
from sensbounds.parameters import ModelKind, Parameter

from .models import (
    CellLoad,
    ElementMatrices,
    LoadVariant,
    MembraneCoefficients,
    MembraneLoad,
    ParamProblem,
    QoI,
)

logger = logging.getLogger(__name__)

MEMBRANE_MEAN = (1.0, 0.125)
QOI_BOX = Box(0.5, 0.625, 0.5, 0.625)


def bilinear_basis(
    xi: np.ndarray, eta: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Values and reference-coordinate derivatives of the four corner functions
    at points (xi, eta) of [0, 1]², corners ordered CCW from (0, 0).
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    values = np.column_stack(
        [(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta]
    )
    d_xi = np.column_stack([-(1 - eta), 1 - eta, eta, -eta])
    d_eta = np.column_stack([-(1 - xi), -xi, xi, 1 - xi])
    return values, d_xi, d_eta


def _reference_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Laplace matrix (h-independent in 2D) and mass matrix for h = 1."""
    xi, eta, w = gauss_rule(2, dim=2).on_unit_square()
    values, d_xi, d_eta = bilinear_basis(xi, eta)
    laplace = d_xi.T @ (w[:, None] * d_xi) + d_eta.T @ (w[:, None] * d_eta)
    mass = values.T @ (w[:, None] * values)
    return laplace, mass


_LAPLACE, _MASS = _reference_matrices()


def element_quad(
    h: float,
    a: float,
    k: float,
    a_prime: float = 0.0,
    k_prime: float = 0.0,
    density: float = 0.0,
    density_prime: float = 0.0,
) -> ElementMatrices:
    """Element matrices of a square cell of side h (exact 2×2 Gauss)."""
    if h <= 0.0:
        raise ValueError(f"Cell size must be positive, got {h}")
    corner = h * h / 4.0
    return ElementMatrices(
        stiffness=a * _LAPLACE + k * h * h * _MASS,
        stiffness_prime=a_prime * _LAPLACE + k_prime * h * h * _MASS,
        load=np.full(4, density * corner),
        load_prime=np.full(4, density_prime * corner),
    )


# ---------------------------------------------------------------------- #
# Assembly
# ---------------------------------------------------------------------- #


def assemble_quad_matrix(mesh: Mesh2D, a: float, k: float) -> SymSparse:
    ke = element_quad(mesh.h, a, k).stiffness
    cells = mesh.cells
    rows = np.repeat(cells, 4, axis=1).ravel()
    cols = np.tile(cells, (1, 4)).ravel()
    vals = np.tile(ke.ravel(), mesh.n_cells)
    return SymSparse.from_coo(rows, cols, vals, mesh.n_nodes)


def assemble_cell_load(mesh: Mesh2D, load: CellLoad) -> np.ndarray:
    out = np.zeros(mesh.n_nodes)
    h = mesh.h
    corner = np.repeat((load.density * h * h / 4.0)[:, None], 4, axis=1)
    np.add.at(out, mesh.cells.ravel(), corner.ravel())
    ends = np.repeat((load.line * h / 2.0)[:, None], 2, axis=1)
    np.add.at(out, mesh.edge_nodes.ravel(), ends.ravel())
    return out


def assemble_membrane_load(mesh: Mesh2D, load: MembraneLoad) -> np.ndarray:
    return assemble_cell_load(mesh, load.resolve(mesh))


# ---------------------------------------------------------------------- #
# Model problem
# ---------------------------------------------------------------------- #


def build_membrane_problem(
    parameter: Parameter,
    n: int,
    xi: float = 1.0,
    beta: tuple[float, float] = MEMBRANE_MEAN,
    load_variant: LoadVariant = LoadVariant.BOUNDARY_F,
) -> ParamProblem:
    """
    The membrane at parameter values ``beta`` = (β₁, β₂) on an n×n mesh.

    The ∂β₂ load is a unit line density on ∂Ω_f (transport of the load
    region) or, for ``LoadVariant.BOUNDARY_QOI``, on ∂Ω_QoI.
    """
    beta1, beta2 = beta
    mesh = build_quad_mesh(n)
    omega_f = Box.centered(0.5, 0.5, beta2)
    load = MembraneLoad(regions=((omega_f, 1.0),))

    if parameter is Parameter.BETA2:
        box = omega_f if load_variant is LoadVariant.BOUNDARY_F else QOI_BOX
        load_prime = MembraneLoad(boundaries=((box, 1.0),))
    else:
        load_prime = MembraneLoad()

    # Fail early on misaligned load regions.
    load.resolve(mesh)
    load_prime.resolve(mesh)

    coefficients = MembraneCoefficients(
        a=beta1, k=1.0, a_prime=1.0 if parameter is Parameter.BETA1 else 0.0
    )
    return ParamProblem(
        model=ModelKind.MEMBRANE,
        parameter=parameter,
        mean_values=(beta1, beta2),
        xi=xi,
        mesh=mesh,
        load=load,
        load_prime=load_prime,
        coefficients=coefficients,
        label=f"membrane-{parameter.value}",
    )


def membrane_qoi(mesh: Mesh2D, box: Box = QOI_BOX) -> QoI:
    """Average of u over ``box``: g_i = ∫_box N_i / |box|."""
    load = MembraneLoad(regions=((box, 1.0 / box.area),))
    g = assemble_membrane_load(mesh, load)
    return QoI(
        kind="subdomain-average", label="average", extraction_vector=g, load=load
    )
