"""Problem, load and quantity-of-interest records shared by both models."""

from dataclasses import dataclass, field
from enum import Enum
from math import inf

import numpy as np

from sensbounds.mesh import Box, Mesh1D, Mesh2D, gauss_rule
from sensbounds.parameters import ModelKind, Parameter


class LoadVariant(str, Enum):
    """Where the membrane's ∂β₂ line load sits."""

    BOUNDARY_F = "boundary_f"
    BOUNDARY_QOI = "boundary_qoi"


@dataclass(slots=True, frozen=True)
class ElementMatrices:
    stiffness: np.ndarray
    stiffness_prime: np.ndarray
    load: np.ndarray
    load_prime: np.ndarray


# ---------------------------------------------------------------------- #
# Frame loads
# ---------------------------------------------------------------------- #


@dataclass(slots=True, frozen=True)
class PointLoad:
    """Force (fx, fy) and clockwise moment applied at a frame joint."""

    node: str
    fx: float = 0.0
    fy: float = 0.0
    moment: float = 0.0


@dataclass(slots=True, frozen=True)
class ResolvedBeamLoad:
    """A beam load on a concrete mesh: transverse density per element + nodal forces."""

    q: np.ndarray  # (n_elements,)
    nodal: np.ndarray  # (n_free,)

    @property
    def scale(self) -> float:
        return float(
            max(
                np.max(np.abs(self.q), initial=0.0),
                np.max(np.abs(self.nodal), initial=0.0),
            )
        )


@dataclass(slots=True, frozen=True)
class BeamLoad:
    """
    Loads on a frame.

    ``distributed`` holds (member, q) with q the uniform transverse load
    along the member's left normal. ``dof_forces`` holds generalized forces
    applied directly to named DOFs (used for point-DOF quantities of interest).
    """

    distributed: tuple[tuple[str, float], ...] = ()
    points: tuple[PointLoad, ...] = ()
    dof_forces: tuple[tuple[str, float], ...] = ()

    def scaled(self, factor: float) -> "BeamLoad":
        return BeamLoad(
            distributed=tuple((m, factor * q) for m, q in self.distributed),
            points=tuple(
                PointLoad(p.node, factor * p.fx, factor * p.fy, factor * p.moment)
                for p in self.points
            ),
            dof_forces=tuple((d, factor * v) for d, v in self.dof_forces),
        )

    def resolve(self, mesh: Mesh1D) -> ResolvedBeamLoad:
        q = np.zeros(len(mesh.elements))
        for member, density in self.distributed:
            m = mesh.member_index(member)
            q[mesh.elements_of(m)] += density

        nodal = np.zeros(mesh.n_free)
        for p in self.points:
            node = mesh.geometry.node(p.node)
            for name, cx, cy in node.translation:
                nodal[mesh.named_dof(name)] += cx * p.fx + cy * p.fy
            if p.moment and not node.fixed_rotation:
                nodal[mesh.named_dof(node.rotation_dof)] += p.moment
        for name, value in self.dof_forces:
            nodal[mesh.named_dof(name)] += value
        return ResolvedBeamLoad(q=q, nodal=nodal)


# ---------------------------------------------------------------------- #
# Membrane loads
# ---------------------------------------------------------------------- #


@dataclass(slots=True, frozen=True)
class CellLoad:
    """A membrane load on a concrete mesh: density per cell + line density per edge."""

    density: np.ndarray  # (n_cells,)
    line: np.ndarray  # (n_edges,)

    @property
    def scale(self) -> float:
        return float(
            max(
                np.max(np.abs(self.density), initial=0.0),
                np.max(np.abs(self.line), initial=0.0),
            )
        )


@dataclass(slots=True, frozen=True)
class MembraneLoad:
    """
    Piecewise constant area loads on boxes plus constant line loads on box
    boundaries. Every box must be mesh-aligned on the mesh it is resolved on.
    """

    regions: tuple[tuple[Box, float], ...] = ()
    boundaries: tuple[tuple[Box, float], ...] = ()

    def scaled(self, factor: float) -> "MembraneLoad":
        return MembraneLoad(
            regions=tuple((b, factor * d) for b, d in self.regions),
            boundaries=tuple((b, factor * d) for b, d in self.boundaries),
        )

    def resolve(self, mesh: Mesh2D) -> CellLoad:
        density = np.zeros(mesh.n_cells)
        for box, value in self.regions:
            density[mesh.cells_in(box)] += value
        line = np.zeros(mesh.n_edges)
        for box, value in self.boundaries:
            np.add.at(line, mesh.edges_on(box), value)
        return CellLoad(density=density, line=line)


@dataclass(slots=True, frozen=True)
class MembraneCoefficients:
    """a ∇u·∇v + k u v, with parameter derivatives a' and k'."""

    a: float
    k: float
    a_prime: float = 0.0
    k_prime: float = 0.0

    def __post_init__(self) -> None:
        if self.a <= 0.0 or self.k <= 0.0:
            raise ValueError(
                f"Membrane coefficients must be positive, got a={self.a}, k={self.k}"
            )


# ---------------------------------------------------------------------- #
# Problem and quantity of interest
# ---------------------------------------------------------------------- #


@dataclass(slots=True, frozen=True)
class ParamProblem:
    """
    A parameterized linear problem at the mean parameter value.

    Holds everything needed to assemble K, K', f and f'. ``xi`` is checked
    against the admissible range (0, xi_max) on construction.
    """

    model: ModelKind
    parameter: Parameter
    mean_values: tuple[float, float]
    xi: float
    mesh: Mesh1D | Mesh2D
    load: BeamLoad | MembraneLoad
    load_prime: BeamLoad | MembraneLoad
    coefficients: MembraneCoefficients | None = None
    label: str = field(default="")

    def __post_init__(self) -> None:
        if self.model is ModelKind.MEMBRANE and self.coefficients is None:
            raise ValueError("Membrane problems need MembraneCoefficients")
        if not self.xi > 0.0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        xi_max = self.xi_max
        if self.xi >= xi_max:
            raise ValueError(
                f"xi={self.xi} outside admissible range (0, xi_max={xi_max:g})"
            )

    @property
    def has_stiffness_derivative(self) -> bool:
        return self.coefficient_ratio() > 0.0

    def coefficient_ratio(self) -> float:
        """ψ = max |coef'/coef| over the domain (both stiffness components)."""
        if isinstance(self.mesh, Mesh2D):
            assert self.coefficients is not None
            c = self.coefficients
            return max(abs(c.a_prime) / c.a, abs(c.k_prime) / c.k)

        rule = gauss_rule(8, dim=1)
        ratio = 0.0
        for element in self.mesh.elements:
            profile = self.mesh.members[element.member].stiffness_profile
            if not profile.has_derivative:
                continue
            s, _ = rule.on_interval(element.s_a, element.s_b)
            s = np.concatenate([[element.s_a], s, [element.s_b]])
            local = np.abs(profile.derivative(s) / profile.value(s))
            ratio = max(ratio, float(np.max(local)))
        return ratio

    @property
    def xi_max(self) -> float:
        psi = self.coefficient_ratio()
        return inf if psi == 0.0 else 2.0 / psi

    def with_xi(self, xi: float) -> "ParamProblem":
        return ParamProblem(
            model=self.model,
            parameter=self.parameter,
            mean_values=self.mean_values,
            xi=xi,
            mesh=self.mesh,
            load=self.load,
            load_prime=self.load_prime,
            coefficients=self.coefficients,
            label=self.label,
        )


@dataclass(slots=True, frozen=True)
class QoI:
    """
    A linear quantity of interest J(v) = gᵀv.

    ``load`` expresses J as a load on the same mesh, so the adjoint
    equilibration can recover a field balancing it.
    """

    kind: str  # "point-dof" | "subdomain-average" | "custom"
    label: str
    extraction_vector: np.ndarray
    load: BeamLoad | MembraneLoad | None = None

    def __post_init__(self) -> None:
        if not np.any(self.extraction_vector):
            raise ValueError(f"QoI {self.label!r} has a zero extraction vector")

    def __call__(self, coefficients: np.ndarray) -> float:
        return float(self.extraction_vector @ coefficients)
