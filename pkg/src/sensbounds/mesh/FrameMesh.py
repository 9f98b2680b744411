"""
Plane frames of axially rigid Hermite beam members.

A frame is described by a :class:`FrameGeometry` (joints + members) and
discretized by :func:`build_frame_mesh` into a :class:`Mesh1D`.

Sign conventions
────────────────
    local deflection w   along the member's left normal n = (-e_y, e_x)
    local rotation θ     dw/ds, counterclockwise positive
    joint rotation DOF   clockwise positive, so θ_local = -θ_joint
    joint translation    u_joint = Σ_d c_d · q_d over named translation DOFs

Members carry no axial DOF. A joint's translation along a member axis must
therefore be the same linear form at both member ends, which
:class:`FrameGeometry` checks on construction.

The portal frame used by the studies::

        B ────────── C        ← P₀ at C, +x
        │   q (down)  │
        │             │
        A             D       fixed supports

with one shared sway DOF for B and C and EI(s) = EI₀ (1 + s/l)² on the
columns, s measured from the support.
"""

import logging
from dataclasses import dataclass, field
from math import ceil, log

import numpy as np
from numpy.polynomial import Polynomial

from .Quadrature import MAX_ORDER

logger = logging.getLogger(__name__)

# Target relative error of pole-adapted Gauss rules for rational integrands.
_RATIONAL_TOL_DIGITS = 17.0

# Linear forms (free DOF -> coefficient) of a node's local w and θ.
NodeForm = tuple[dict[int, float], dict[int, float]]


@dataclass(slots=True, frozen=True)
class StiffnessProfile:
    """
    Bending stiffness EI(s) and its parameter derivative EI'(s) along a member.

    Both are polynomials in the member coordinate ``s`` (ascending
    coefficients). EI must stay positive on the member.
    """

    ei: tuple[float, ...]
    ei_prime: tuple[float, ...] = (0.0,)

    @classmethod
    def constant(cls, ei: float, ei_prime: float = 0.0) -> "StiffnessProfile":
        return cls(ei=(float(ei),), ei_prime=(float(ei_prime),))

    @classmethod
    def tapered(cls, ei0: float, length: float) -> "StiffnessProfile":
        """EI(s) = EI₀ (1 + s/l)², parameter independent."""
        return cls(ei=(ei0, 2.0 * ei0 / length, ei0 / length**2), ei_prime=(0.0,))

    def value(self, s: np.ndarray | float) -> np.ndarray:
        return np.polynomial.polynomial.polyval(s, self.ei)

    def derivative(self, s: np.ndarray | float) -> np.ndarray:
        return np.polynomial.polynomial.polyval(s, self.ei_prime)

    @property
    def has_derivative(self) -> bool:
        return any(c != 0.0 for c in self.ei_prime)

    def local(self, s_a: float) -> tuple[np.ndarray, np.ndarray]:
        """EI and EI' as polynomials in the element coordinate x = s - s_a."""
        shift = Polynomial([s_a, 1.0])
        ei = Polynomial(self.ei)(shift).coef
        ei_prime = Polynomial(self.ei_prime)(shift).coef
        return ei, ei_prime

    def poles(self, xi: float = 0.0) -> np.ndarray:
        """
        Complex roots of EI and of EI ± (ξ/2) EI'.

        These are the singularities of the CRE integrands 1/EI and
        1/(EI (1 - λ²)) with λ = ξ EI' / (2 EI).
        """
        ei = Polynomial(self.ei)
        candidates = [ei]
        if self.has_derivative and xi > 0.0:
            half = Polynomial(self.ei_prime) * (0.5 * xi)
            candidates.extend([ei + half, ei - half])
        roots = [p.trim().roots() for p in candidates if p.trim().degree() > 0]
        if not roots:
            return np.empty(0, dtype=complex)
        return np.concatenate(roots).astype(complex)

    def rule_order(self, s_a: float, s_b: float, degree: int, xi: float = 0.0) -> int:
        """
        Gauss points needed on [s_a, s_b] for a polynomial of ``degree``
        divided by powers of EI (and of EI ± ξEI'/2).

        The count follows from the Bernstein ellipse through the nearest pole:
        the error decays like ρ^(-2n).
        """
        n_poly = ceil((degree + 1) / 2)
        poles = self.poles(xi)
        if poles.size == 0:
            return max(1, n_poly)

        t = (2.0 * poles - (s_a + s_b)) / (s_b - s_a)
        z = t + np.sqrt(t * t - 1.0 + 0j)
        rho = float(np.min(np.maximum(np.abs(z), 1.0 / np.abs(z))))
        if rho <= 1.0 + 1e-12:
            raise ValueError(f"stiffness vanishes on the element [{s_a}, {s_b}]")

        n_rational = ceil(_RATIONAL_TOL_DIGITS * log(10.0) / (2.0 * log(rho)))
        order = n_rational + n_poly
        if order > MAX_ORDER:
            logger.warning(
                "Element [%g, %g] needs %d Gauss points, clamped to %d",
                s_a,
                s_b,
                order,
                MAX_ORDER,
            )
            order = MAX_ORDER
        return order


@dataclass(slots=True, frozen=True)
class FrameNode:
    """
    A joint of the frame.

    ``translation`` lists ``(dof_name, c_x, c_y)``: the joint displacement is
    the sum of c · q over the named translation DOFs. An empty tuple means the
    joint does not translate.
    """

    name: str
    x: float
    y: float
    fixed_rotation: bool = False
    translation: tuple[tuple[str, float, float], ...] = ()

    @property
    def rotation_dof(self) -> str:
        return f"rotation:{self.name}"

    def translation_along(self, direction: np.ndarray) -> dict[str, float]:
        """Displacement along ``direction`` as a linear form (dof name -> coef)."""
        form: dict[str, float] = {}
        for name, cx, cy in self.translation:
            coef = float(cx * direction[0] + cy * direction[1])
            if coef != 0.0:
                form[name] = form.get(name, 0.0) + coef
        return form


@dataclass(slots=True, frozen=True)
class MemberDef:
    name: str
    start: str
    end: str
    profile: StiffnessProfile


@dataclass(slots=True, frozen=True)
class Member:
    name: str
    start_node: str
    end_node: str
    length: float
    axis_direction: np.ndarray
    stiffness_profile: StiffnessProfile

    @property
    def normal(self) -> np.ndarray:
        return np.array([-self.axis_direction[1], self.axis_direction[0]])


@dataclass(slots=True, frozen=True)
class FrameGeometry:
    """
    Joints and members of a plane frame.

    Example:
        geometry = FrameGeometry.portal(beam_ei_prime=1.0)
        mesh = build_frame_mesh(geometry, 4)
    """

    nodes: tuple[FrameNode, ...]
    members: tuple[MemberDef, ...]

    def __post_init__(self) -> None:
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate node names in frame: {names}")
        by_name = {n.name: n for n in self.nodes}

        for m in self.members:
            if m.start not in by_name or m.end not in by_name:
                raise ValueError(f"Member {m.name!r} references an unknown node")
            a, b = by_name[m.start], by_name[m.end]
            length = float(np.hypot(b.x - a.x, b.y - a.y))
            if length <= 0.0:
                raise ValueError(f"Member {m.name!r} has zero length")

            axis = np.array([b.x - a.x, b.y - a.y]) / length
            if a.translation_along(axis) != b.translation_along(axis):
                raise ValueError(
                    f"Member {m.name!r} violates axial rigidity: end translations "
                    f"along its axis differ"
                )

    def node(self, name: str) -> FrameNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(f"Node {name!r} not in frame")

    @classmethod
    def portal(
        cls,
        length: float = 1.0,
        ei0: float = 1.0,
        beta1: float = 1.0,
        beam_ei_prime: float = 0.0,
    ) -> "FrameGeometry":
        """Fixed-base portal frame: columns AB, DC of height l and beam BC of span l."""
        sway = (("sway", 1.0, 0.0),)
        nodes = (
            FrameNode("A", 0.0, 0.0, fixed_rotation=True),
            FrameNode("B", 0.0, length, translation=sway),
            FrameNode("C", length, length, translation=sway),
            FrameNode("D", length, 0.0, fixed_rotation=True),
        )
        column = StiffnessProfile.tapered(ei0, length)
        beam = StiffnessProfile.constant(beta1 * ei0, beam_ei_prime)
        members = (
            MemberDef("AB", "A", "B", column),
            MemberDef("BC", "B", "C", beam),
            MemberDef("DC", "D", "C", column),
        )
        return cls(nodes=nodes, members=members)

    @classmethod
    def clamped_beam(
        cls, length: float = 1.0, profile: StiffnessProfile | None = None
    ) -> "FrameGeometry":
        """Single horizontal member clamped at both ends."""
        nodes = (
            FrameNode("L", 0.0, 0.0, fixed_rotation=True),
            FrameNode("R", length, 0.0, fixed_rotation=True),
        )
        members = (
            MemberDef("LR", "L", "R", profile or StiffnessProfile.constant(1.0)),
        )
        return cls(nodes=nodes, members=members)


@dataclass(slots=True, frozen=True)
class Element:
    """
    One Hermite element on ``member`` over [s_a, s_b].

    ``dofs`` are the global free DOFs touching the element and ``transform``
    (4 × len(dofs)) maps them onto the local (w_a, θ_a, w_b, θ_b).
    """

    member: int
    s_a: float
    s_b: float
    dofs: np.ndarray
    transform: np.ndarray

    @property
    def length(self) -> float:
        return self.s_b - self.s_a

    def gather(self, vector: np.ndarray) -> np.ndarray:
        """Local (w_a, θ_a, w_b, θ_b) of a global free-DOF vector."""
        return self.transform @ vector[self.dofs]


@dataclass(slots=True, frozen=True)
class Mesh1D:
    geometry: FrameGeometry
    members: tuple[Member, ...]
    elements: tuple[Element, ...]
    n_free: int
    dof_names: dict[str, int]
    # member index -> node positions along s
    node_positions: tuple[np.ndarray, ...]
    # member index -> per node (w form, θ form) over free DOFs
    node_forms: tuple[tuple[NodeForm, ...], ...] = field(repr=False)

    @property
    def h(self) -> float:
        """Largest element length."""
        return max(e.length for e in self.elements)

    def member_index(self, name: str) -> int:
        for i, m in enumerate(self.members):
            if m.name == name:
                return i
        raise KeyError(f"Member {name!r} not in mesh")

    def elements_of(self, member: int) -> list[int]:
        return [i for i, e in enumerate(self.elements) if e.member == member]

    def named_dof(self, name: str) -> int:
        try:
            return self.dof_names[name]
        except KeyError:
            raise KeyError(f"DOF {name!r} not in mesh") from None

    def unit_vector(self, name: str) -> np.ndarray:
        g = np.zeros(self.n_free)
        g[self.named_dof(name)] = 1.0
        return g

    def point_dof(self, member: str, s: float, component: str) -> np.ndarray:
        """
        Extraction vector of the local deflection ("w") or rotation ("theta")
        at position ``s`` of ``member``. A mesh node must sit at ``s``.
        """
        if component not in ("w", "theta"):
            raise ValueError(f"Unknown point component {component!r}")
        m = self.member_index(member)
        positions = self.node_positions[m]
        hits = np.flatnonzero(np.isclose(positions, s, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise ValueError(f"No mesh node at s={s} on member {member!r}")
        form = self.node_forms[m][int(hits[0])][0 if component == "w" else 1]
        g = np.zeros(self.n_free)
        for dof, coef in form.items():
            g[dof] += coef
        return g


def build_frame_mesh(geometry: FrameGeometry, n_per_member: int) -> Mesh1D:
    """
    Split every member into ``n_per_member`` equal Hermite elements and number
    the free DOFs in the order members are listed: start-joint DOFs, interior
    node DOFs, end-joint DOFs, each joint numbered on first appearance.
    """
    if n_per_member < 1:
        raise ValueError(f"n_per_member must be >= 1, got {n_per_member}")

    dof_names: dict[str, int] = {}
    counter = 0

    def allocate(name: str) -> int:
        nonlocal counter
        if name not in dof_names:
            dof_names[name] = counter
            counter += 1
        return dof_names[name]

    def joint_forms(node: FrameNode, normal: np.ndarray) -> NodeForm:
        translation = node.translation_along(normal)
        w_form = {allocate(name): coef for name, coef in translation.items()}
        theta_form = {} if node.fixed_rotation else {allocate(node.rotation_dof): -1.0}
        return w_form, theta_form

    members: list[Member] = []
    positions: list[np.ndarray] = []
    forms: list[tuple[NodeForm, ...]] = []

    for mdef in geometry.members:
        a, b = geometry.node(mdef.start), geometry.node(mdef.end)
        length = float(np.hypot(b.x - a.x, b.y - a.y))
        axis = np.array([b.x - a.x, b.y - a.y]) / length
        member = Member(mdef.name, a.name, b.name, length, axis, mdef.profile)
        members.append(member)

        start = joint_forms(a, member.normal)
        interior = []
        for k in range(1, n_per_member):
            w = allocate(f"{mdef.name}:w:{k}")
            theta = allocate(f"{mdef.name}:theta:{k}")
            interior.append(({w: 1.0}, {theta: 1.0}))
        end = joint_forms(b, member.normal)

        forms.append((start, *interior, end))
        positions.append(np.linspace(0.0, length, n_per_member + 1))

    elements: list[Element] = []
    for m, member in enumerate(members):
        s = positions[m]
        for k in range(n_per_member):
            rows = [*forms[m][k], *forms[m][k + 1]]
            dofs = sorted({d for row in rows for d in row})
            column = {d: j for j, d in enumerate(dofs)}
            transform = np.zeros((4, len(dofs)))
            for i, row in enumerate(rows):
                for d, coef in row.items():
                    transform[i, column[d]] += coef
            element = Element(
                m, float(s[k]), float(s[k + 1]), np.array(dofs, dtype=int), transform
            )
            elements.append(element)

    logger.debug(
        "Frame mesh: %d members, %d elements, %d free DOFs",
        len(members),
        len(elements),
        counter,
    )
    return Mesh1D(
        geometry=geometry,
        members=tuple(members),
        elements=tuple(elements),
        n_free=counter,
        dof_names=dof_names,
        node_positions=tuple(positions),
        node_forms=tuple(forms),
    )
