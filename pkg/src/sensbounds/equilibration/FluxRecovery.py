"""
Equilibrated membrane fluxes by element equilibration.

The flux approximates a∇u; equilibrium reads -div q̂ + r̂ = f inside cells,
with line loads balanced by flux jumps across edges.

Two stages:

1. Edge tractions. On an interior edge E the traction seen by cell K is
   t_K = ℓ_E/2 + s_K τ_E, with s_K = ±1 from the edge's global normal and
   τ_E linear. Its hat moments β_E = (∫τφ_a, ∫τφ_b) are fixed vertex by
   vertex by the prolongation conditions

       ∫_∂K t_K φ_i = ∫_K q_h·∇φ_i + ∫_K r_h φ_i - ∫_K f φ_i

   taking, on each vertex patch, the solution closest to the averaged FE
   flux. Boundary edges carry t_K = ℓ_E.

2. Local solves. On each cell the flux is the member of the 12-term space
   (see StressField) matching the tractions on ∂K and the divergence
   condition. The system has a one-dimensional kernel (a discrete curl);
   its coefficient is chosen to stay closest to the FE flux.

The reaction is kept equal to the FE reaction k u_h.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from sensbounds.forms import (
    CellLoad,
    MembraneCoefficients,
    MembraneLoad,
    bilinear_basis,
)
from sensbounds.mesh import SIDE_SIGNS, Mesh2D, gauss_rule
from sensbounds.parameters import ModelKind

from .StressField import Coupling, EquilibriumError, StressField

logger = logging.getLogger(__name__)

FLUX_TOL = 1e-10

# Cell corners at the (a, b) ends of each side, sides ordered left, right, bottom, top.
SIDE_CORNERS = np.array([[0, 3], [1, 2], [0, 1], [3, 2]])


# ---------------------------------------------------------------------- #
# Reference-cell data
# ---------------------------------------------------------------------- #


def _flux_exponents() -> tuple[np.ndarray, np.ndarray]:
    qx = np.array([(a, b) for a in range(3) for b in range(2)])
    qy = np.array([(a, b) for a in range(2) for b in range(3)])
    return qx, qy


_QX_EXP, _QY_EXP = _flux_exponents()
_Q1_EXP = np.array([(0, 0), (1, 0), (0, 1), (1, 1)])


def _trace_rows() -> np.ndarray:
    """(8, 12): global-normal flux at the (a, b) ends of each side."""
    rows = np.zeros((8, 12))
    for k, (a, b) in enumerate(_QX_EXP):
        rows[0, k] = float(a == 0 and b == 0)  # left, η = 0
        rows[1, k] = float(a == 0)  # left, η = 1
        rows[2, k] = float(b == 0)  # right, η = 0
        rows[3, k] = 1.0  # right, η = 1
    for k, (a, b) in enumerate(_QY_EXP):
        rows[4, 6 + k] = float(a == 0 and b == 0)  # bottom, ξ = 0
        rows[5, 6 + k] = float(b == 0)  # bottom, ξ = 1
        rows[6, 6 + k] = float(a == 0)  # top, ξ = 0
        rows[7, 6 + k] = 1.0  # top, ξ = 1
    return rows


def _divergence_rows() -> np.ndarray:
    """(4, 12): h·div q in the monomials (1, ξ, η, ξη)."""
    rows = np.zeros((4, 12))
    target = {tuple(e): i for i, e in enumerate(_Q1_EXP)}
    for k, (a, b) in enumerate(_QX_EXP):
        if a > 0:
            rows[target[(a - 1, b)], k] += a
    for k, (a, b) in enumerate(_QY_EXP):
        if b > 0:
            rows[target[(a, b - 1)], 6 + k] += b
    return rows


def _gram(exponents: np.ndarray) -> np.ndarray:
    """∫_[0,1]² of products of monomials ξ^a η^b."""
    a = exponents[:, 0]
    b = exponents[:, 1]
    return 1.0 / ((a[:, None] + a[None, :] + 1) * (b[:, None] + b[None, :] + 1))


_TRACE = _trace_rows()
_DIV = _divergence_rows()
_LOCAL = np.vstack([_TRACE, _DIV])
_LOCAL_PINV = np.linalg.pinv(_LOCAL, rcond=1e-10)
_KERNEL = np.linalg.svd(_LOCAL)[2][-1]

FLUX_GRAM = np.zeros((12, 12))
FLUX_GRAM[:6, :6] = _gram(_QX_EXP)
FLUX_GRAM[6:, 6:] = _gram(_QY_EXP)
REACTION_GRAM = _gram(_Q1_EXP)


def _monomials(exponents: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return xi[:, None] ** exponents[:, 0] * eta[:, None] ** exponents[:, 1]


# ---------------------------------------------------------------------- #
# FE fields
# ---------------------------------------------------------------------- #


def membrane_fe_stress(
    mesh: Mesh2D, coeffs: np.ndarray, a: float, k: float
) -> StressField:
    """Flux a∇u_h and reaction k u_h of a bilinear coefficient vector."""
    u = coeffs[mesh.cells]
    u0, u1, u2, u3 = u.T
    twist = u0 - u1 + u2 - u3
    flux = np.zeros((mesh.n_cells, 12))
    flux[:, 0] = a * (u1 - u0) / mesh.h
    flux[:, 1] = a * twist / mesh.h
    flux[:, 6] = a * (u3 - u0) / mesh.h
    flux[:, 9] = a * twist / mesh.h
    reaction = k * np.column_stack([u0, u1 - u0, u3 - u0, twist])
    return StressField(ModelKind.MEMBRANE, flux, reaction)


def side_traces(field: StressField) -> np.ndarray:
    """(n_cells, 4, 2) flux along each side's global normal at its (a, b) ends."""
    return (field.flux @ _TRACE.T).reshape(-1, 4, 2)


def _resolve(mesh: Mesh2D, load: MembraneLoad | CellLoad) -> CellLoad:
    return load.resolve(mesh) if isinstance(load, MembraneLoad) else load


# ---------------------------------------------------------------------- #
# Vertex patches
# ---------------------------------------------------------------------- #

# Rows: cells around vertex (I, J) in slots (I, J), (I-1, J), (I-1, J-1), (I, J-1),
# where the vertex is corner 0, 1, 2, 3 respectively. Columns: edges h(I, J),
# h(I-1, J), v(I, J), v(I, J-1). Entries are the cell's side sign on the edge.
_PATCH_SIGNS = np.array(
    [
        [-1.0, 0.0, -1.0, 0.0],
        [0.0, -1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, -1.0],
    ]
)
# Which end (a = 0, b = 1) of each patch edge the vertex is.
_PATCH_ENDS = np.array([0, 1, 0, 1])


@dataclass(slots=True, frozen=True)
class VertexGroup:
    """Vertices sharing one patch shape, solved with a single pseudo-inverse."""

    cells: np.ndarray  # (n_vertices, n_cells_in_patch)
    corners: np.ndarray  # (n_cells_in_patch,)
    edges: np.ndarray  # (n_vertices, n_edges_in_patch)
    ends: np.ndarray  # (n_edges_in_patch,)
    signs: np.ndarray  # (n_cells_in_patch, n_edges_in_patch)
    pinv: np.ndarray


@lru_cache(maxsize=8)
def vertex_groups(mesh: Mesh2D) -> tuple[VertexGroup, ...]:
    n = mesh.n
    boundary = mesh.boundary_edges
    buckets: dict[tuple, tuple[list, list]] = {}
    for J in range(n + 1):
        for I in range(n + 1):
            slots = [(I, J), (I - 1, J), (I - 1, J - 1), (I, J - 1)]
            cells = [
                j * n + i if 0 <= i < n and 0 <= j < n else -1 for i, j in slots
            ]
            edges = [
                mesh.horizontal_edge(I, J) if I < n else -1,
                mesh.horizontal_edge(I - 1, J) if I > 0 else -1,
                mesh.vertical_edge(I, J) if J < n else -1,
                mesh.vertical_edge(I, J - 1) if J > 0 else -1,
            ]
            edges = [e if e >= 0 and not boundary[e] else -1 for e in edges]
            key = (tuple(c >= 0 for c in cells), tuple(e >= 0 for e in edges))
            if not any(key[1]):
                continue
            bucket = buckets.setdefault(key, ([], []))
            bucket[0].append([c for c in cells if c >= 0])
            bucket[1].append([e for e in edges if e >= 0])

    groups = []
    for (cell_mask, edge_mask), (cells, edges) in buckets.items():
        slots = np.flatnonzero(cell_mask)
        columns = np.flatnonzero(edge_mask)
        signs = _PATCH_SIGNS[np.ix_(slots, columns)]
        groups.append(
            VertexGroup(
                cells=np.array(cells, dtype=int),
                corners=slots,
                edges=np.array(edges, dtype=int),
                ends=_PATCH_ENDS[columns],
                signs=signs,
                pinv=np.linalg.pinv(signs, rcond=1e-10),
            )
        )
    return tuple(groups)


def _cell_residuals(mesh: Mesh2D, fe: StressField, load: CellLoad) -> np.ndarray:
    """(n_cells, 4) ∫ q_h·∇φ_i + ∫ r_h φ_i - ∫ f φ_i."""
    h = mesh.h
    xi, eta, w = gauss_rule(3, dim=2).on_unit_square()
    values, d_xi, d_eta = bilinear_basis(xi, eta)
    qx = fe.flux[:, :6] @ _monomials(_QX_EXP, xi, eta).T
    qy = fe.flux[:, 6:] @ _monomials(_QY_EXP, xi, eta).T
    r = fe.reaction @ _monomials(_Q1_EXP, xi, eta).T
    out = h * ((qx * w) @ d_xi + (qy * w) @ d_eta) + h * h * ((r * w) @ values)
    return out - (load.density * h * h / 4.0)[:, None]


def nodal_flux_actions(mesh: Mesh2D, field: StressField) -> np.ndarray:
    """Assembled ∫ q·∇φ_i + ∫ r φ_i over all cells."""
    zero = CellLoad(density=np.zeros(mesh.n_cells), line=np.zeros(mesh.n_edges))
    local = _cell_residuals(mesh, field, zero)
    out = np.zeros(mesh.n_nodes)
    np.add.at(out, mesh.cells.ravel(), local.ravel())
    return out


def _line_share(mesh: Mesh2D, load: CellLoad) -> np.ndarray:
    """(n_cells, 4) fixed part of ∫_∂K t_K φ_i: ℓ/2 inside, ℓ on ∂Ω."""
    h = mesh.h
    boundary = mesh.boundary_edges
    out = np.zeros((mesh.n_cells, 4))
    for side in range(4):
        edges = mesh.cell_edges[:, side]
        share = load.line[edges] * np.where(boundary[edges], h / 2.0, h / 4.0)
        for end in range(2):
            out[:, SIDE_CORNERS[side, end]] += share
    return out


def edge_moments(mesh: Mesh2D, fe: StressField, load: CellLoad) -> np.ndarray:
    """(n_edges, 2) hat moments β of τ on interior edges (zero on the boundary)."""
    h = mesh.h
    cell_edges = mesh.cell_edges
    traces = side_traces(fe)

    averaged = np.zeros((mesh.n_edges, 2))
    counts = np.zeros(mesh.n_edges)
    for side in range(4):
        np.add.at(averaged, cell_edges[:, side], traces[:, side, :])
        np.add.at(counts, cell_edges[:, side], 1.0)
    averaged /= counts[:, None]
    hat = (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    beta_bar = averaged @ hat.T

    rhs = _cell_residuals(mesh, fe, load) - _line_share(mesh, load)
    beta = np.zeros_like(beta_bar)
    for group in vertex_groups(mesh):
        r = rhs[group.cells, group.corners]
        b0 = beta_bar[group.edges, group.ends]
        b = b0 + (r - b0 @ group.signs.T) @ group.pinv.T
        beta[group.edges, group.ends] = b
    beta[mesh.boundary_edges] = 0.0
    return beta


def cell_tractions(mesh: Mesh2D, beta: np.ndarray, load: CellLoad) -> np.ndarray:
    """(n_cells, 8) global-normal flux prescribed at the ends of each side."""
    h = mesh.h
    boundary = mesh.boundary_edges
    tau = beta @ ((2.0 / h) * np.array([[2.0, -1.0], [-1.0, 2.0]])).T
    out = np.empty((mesh.n_cells, 4, 2))
    for side in range(4):
        edges = mesh.cell_edges[:, side]
        sign = SIDE_SIGNS[side]
        line = load.line[edges]
        interior = sign * line[:, None] / 2.0 + tau[edges]
        outer = np.repeat((sign * line)[:, None], 2, axis=1)
        out[:, side] = np.where(boundary[edges][:, None], outer, interior)
    return out.reshape(-1, 8)


# ---------------------------------------------------------------------- #
# Recovery
# ---------------------------------------------------------------------- #


def recover_quad_flux(
    mesh: Mesh2D,
    fe_stress: StressField | np.ndarray,
    load: MembraneLoad | CellLoad,
    coefficients: MembraneCoefficients | None = None,
    tol: float = FLUX_TOL,
) -> StressField:
    """
    An equilibrated flux/reaction pair for ``load``.

    ``fe_stress`` is the FE stress field driving the recovery, or a
    coefficient vector together with ``coefficients`` (a∇u_h, k u_h).

    Raises:
        EquilibriumError: the recovered field misses equilibrium by more
            than ``tol`` relative to the load and stress scale.
    """
    if isinstance(fe_stress, np.ndarray):
        if coefficients is None:
            raise ValueError("recover_quad_flux needs coefficients for a raw vector")
        fe_stress = membrane_fe_stress(mesh, fe_stress, coefficients.a, coefficients.k)
    cell_load = _resolve(mesh, load)
    h = mesh.h

    beta = edge_moments(mesh, fe_stress, cell_load)
    rhs = np.empty((mesh.n_cells, 12))
    rhs[:, :8] = cell_tractions(mesh, beta, cell_load)
    source = fe_stress.reaction.copy()
    source[:, 0] -= cell_load.density
    rhs[:, 8:] = h * source

    flux = rhs @ _LOCAL_PINV.T
    gap = flux - fe_stress.flux
    weight = float(_KERNEL @ FLUX_GRAM @ _KERNEL)
    alpha = -(gap @ FLUX_GRAM @ _KERNEL) / weight
    flux += alpha[:, None] * _KERNEL

    field = StressField(ModelKind.MEMBRANE, flux, fe_stress.reaction.copy())
    defect, scale = flux_defect(mesh, field, cell_load)
    if defect > tol * scale:
        raise EquilibriumError(
            f"Recovered flux is out of equilibrium: {defect:.3e} (scale {scale:.3e})",
            defect=defect,
            scale=scale,
        )
    logger.debug("Recovered flux on %d cells, defect %.2e", mesh.n_cells, defect)
    return field


def flux_defect(
    mesh: Mesh2D, field: StressField, load: MembraneLoad | CellLoad
) -> tuple[float, float]:
    """
    Largest violation of -div q̂ + r̂ = f in cells and of Σ_K q̂·n_K = ℓ on
    edges (a single cell on the boundary), with its scale.
    """
    cell_load = _resolve(mesh, load)
    h = mesh.h
    source = field.reaction.copy()
    source[:, 0] -= cell_load.density
    interior_defect = np.abs(field.flux @ _DIV.T / h - source)

    traces = side_traces(field)
    signed = np.zeros((mesh.n_edges, 2))
    for side in range(4):
        np.add.at(signed, mesh.cell_edges[:, side], SIDE_SIGNS[side] * traces[:, side])
    edge_defect = np.abs(signed - cell_load.line[:, None])

    scale = max(cell_load.scale, field.max_abs(), 1e-300)
    defect = max(float(interior_defect.max()), float(edge_defect.max()))
    return defect, scale


# ---------------------------------------------------------------------- #
# Energy products
# ---------------------------------------------------------------------- #


def membrane_energy_parts(
    mesh: Mesh2D,
    coupling: Coupling,
    p: tuple[StressField, StressField],
    d: tuple[StressField, StressField],
) -> tuple[float, float, float]:
    """
    Parts of the coupled complementary product of two transformed pairs,
    (∫p₁·d₁/a + ρ₁δ₁/k, ∫p₂·d₂/a + ρ₂δ₂/k,
     ∫λ(p₁·d₂ + p₂·d₁)/a + (reaction)).
    """
    c = coupling.coefficients
    assert c is not None
    lam_flux, lam_reaction = coupling.membrane_lambda()
    area = mesh.h * mesh.h

    def parts(x1, x2, y1, y2, lam, gram, stiffness):
        inv = 1.0 / (1.0 - lam * lam)
        p1, p2 = (x1 - lam * x2) * inv, (x2 - lam * x1) * inv
        d1, d2 = (y1 - lam * y2) * inv, (y2 - lam * y1) * inv

        def product(u, v):
            return float(np.einsum("ki,ij,kj->", u, gram, v)) * area / stiffness

        return (
            product(p1, d1),
            product(p2, d2),
            lam * (product(p1, d2) + product(p2, d1)),
        )

    flux = parts(p[0].flux, p[1].flux, d[0].flux, d[1].flux, lam_flux, FLUX_GRAM, c.a)
    reaction = parts(
        p[0].reaction,
        p[1].reaction,
        d[0].reaction,
        d[1].reaction,
        lam_reaction,
        REACTION_GRAM,
        c.k,
    )
    return tuple(x + y for x, y in zip(flux, reaction))
