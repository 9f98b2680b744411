"""
Per-element polynomial stress fields and the coupled residual pair.

Beam fields store the moment M(x) on each element as ascending polynomial
coefficients in the element coordinate x ∈ [0, h]. Membrane fields store
the flux in the 12-term space

    q_x = Σ c[a, b] ξ^a η^b   (a ≤ 2, b ≤ 1)   index 2a + b
    q_y = Σ d[a, b] ξ^a η^b   (a ≤ 1, b ≤ 2)   index 6 + 3a + b

on the cell's reference square (ξ, η) ∈ [0, 1]², plus a reaction field in
the bilinear monomials (1, ξ, η, ξη).
"""

from dataclasses import dataclass

import numpy as np

from sensbounds.forms import MembraneCoefficients, ParamProblem
from sensbounds.mesh import Mesh1D, Mesh2D
from sensbounds.parameters import ModelKind, Role


class EquilibriumError(RuntimeError):
    """A recovered field fails its equilibrium check."""

    def __init__(self, message: str, defect: float = float("nan"), scale: float = 1.0):
        super().__init__(message)
        self.defect = defect
        self.scale = scale


class LambdaRangeError(ValueError):
    """|λ| reached 1 somewhere, so the residual transform is singular."""


def _pad(coefs: np.ndarray, width: int) -> np.ndarray:
    if coefs.shape[1] >= width:
        return coefs
    return np.pad(coefs, ((0, 0), (0, width - coefs.shape[1])))


@dataclass(slots=True, frozen=True)
class StressField:
    """
    A piecewise polynomial stress field.

    Supports ``+``, ``-``, unary ``-`` and :meth:`scaled` (by a scalar or by
    one factor per element), so transforms can be written directly on fields.
    """

    model: ModelKind
    flux: np.ndarray
    reaction: np.ndarray | None = None

    @classmethod
    def zeros(cls, model: ModelKind, n_elements: int) -> "StressField":
        if model is ModelKind.FRAME:
            return cls(model, np.zeros((n_elements, 1)))
        return cls(model, np.zeros((n_elements, 12)), np.zeros((n_elements, 4)))

    @property
    def n_elements(self) -> int:
        return int(self.flux.shape[0])

    def _combine(self, other: "StressField", sign: float) -> "StressField":
        if other.model is not self.model or other.n_elements != self.n_elements:
            raise ValueError("Cannot combine stress fields from different meshes")
        width = max(self.flux.shape[1], other.flux.shape[1])
        flux = _pad(self.flux, width) + sign * _pad(other.flux, width)
        reaction = None
        if self.reaction is not None or other.reaction is not None:
            mine = self.reaction if self.reaction is not None else 0.0
            theirs = other.reaction if other.reaction is not None else 0.0
            reaction = mine + sign * theirs
        return StressField(self.model, flux, reaction)

    def __add__(self, other: "StressField") -> "StressField":
        return self._combine(other, 1.0)

    def __sub__(self, other: "StressField") -> "StressField":
        return self._combine(other, -1.0)

    def __neg__(self) -> "StressField":
        return self.scaled(-1.0)

    def scaled(self, factor: float | np.ndarray) -> "StressField":
        f = np.asarray(factor, dtype=float)
        column = f[:, None] if f.ndim == 1 else f
        reaction = None if self.reaction is None else self.reaction * column
        return StressField(self.model, self.flux * column, reaction)

    def max_abs(self) -> float:
        peak = float(np.max(np.abs(self.flux), initial=0.0))
        if self.reaction is not None:
            peak = max(peak, float(np.max(np.abs(self.reaction), initial=0.0)))
        return peak


# ---------------------------------------------------------------------- #
# λ-transform
# ---------------------------------------------------------------------- #


def forward_transform(p1, p2, lam):
    """{p1, p2} -> {p1 + λ p2, p2 + λ p1}."""
    if isinstance(p1, StressField):
        return p1 + p2.scaled(lam), p2 + p1.scaled(lam)
    return p1 + lam * p2, p2 + lam * p1


def inverse_transform(s1, s2, lam):
    """{s1, s2} -> {(s1 - λ s2), (s2 - λ s1)} / (1 - λ²)."""
    inv = 1.0 / (1.0 - np.asarray(lam, dtype=float) ** 2)
    if isinstance(s1, StressField):
        return (s1 - s2.scaled(lam)).scaled(inv), (s2 - s1.scaled(lam)).scaled(inv)
    return (s1 - lam * s2) * inv, (s2 - lam * s1) * inv


@dataclass(slots=True, frozen=True)
class Coupling:
    """
    The pointwise coupling λ = ξ K' / (2 K) of the block stress form.

    ``xi = 0`` gives the uncoupled (symmetric, single-field) case.
    """

    model: ModelKind
    xi: float
    mesh: Mesh1D | Mesh2D
    coefficients: MembraneCoefficients | None = None

    @classmethod
    def from_problem(cls, problem: ParamProblem) -> "Coupling":
        return cls(problem.model, problem.xi, problem.mesh, problem.coefficients)

    @classmethod
    def uncoupled(cls, problem: ParamProblem) -> "Coupling":
        return cls(problem.model, 0.0, problem.mesh, problem.coefficients)

    def beam_lambda(self, element: int, x: np.ndarray) -> np.ndarray:
        assert isinstance(self.mesh, Mesh1D)
        el = self.mesh.elements[element]
        profile = self.mesh.members[el.member].stiffness_profile
        if self.xi == 0.0 or not profile.has_derivative:
            return np.zeros_like(np.asarray(x, dtype=float))
        s = el.s_a + np.asarray(x, dtype=float)
        return 0.5 * self.xi * profile.derivative(s) / profile.value(s)

    def membrane_lambda(self) -> tuple[float, float]:
        """(λ on the flux, λ on the reaction)."""
        c = self.coefficients
        assert c is not None
        return 0.5 * self.xi * c.a_prime / c.a, 0.5 * self.xi * c.k_prime / c.k

    def element_lambda(self) -> np.ndarray | None:
        """
        λ per element when it is constant on every element, else None.
        For the membrane this is the flux coupling.
        """
        if self.model is ModelKind.MEMBRANE:
            assert isinstance(self.mesh, Mesh2D)
            return np.full(self.mesh.n_cells, self.membrane_lambda()[0])

        assert isinstance(self.mesh, Mesh1D)
        values = np.empty(len(self.mesh.elements))
        for e, el in enumerate(self.mesh.elements):
            lam = self.beam_lambda(e, np.array([0.0, 0.5 * el.length, el.length]))
            if np.ptp(lam) > 1e-15 * max(1.0, float(np.max(np.abs(lam)))):
                return None
            values[e] = lam[0]
        return values

    def max_abs(self) -> float:
        if self.model is ModelKind.MEMBRANE:
            return max(abs(v) for v in self.membrane_lambda())
        assert isinstance(self.mesh, Mesh1D)
        peak = 0.0
        for e, el in enumerate(self.mesh.elements):
            x = np.linspace(0.0, el.length, 9)
            peak = max(peak, float(np.max(np.abs(self.beam_lambda(e, x)))))
        return peak


@dataclass(slots=True, frozen=True)
class AdmissibleResidualPair:
    """
    An equilibrated residual pair in transformed form.

    ``first`` and ``second`` are s₁ = σ̂_h - A₁ and s₂ = Σ̂_h - A₂, which
    balance the two block residual functionals. The residual pair itself is
    {σ̂res, Σ̂res} = inverse_transform(s₁, s₂, λ), evaluated pointwise where
    λ varies inside an element.
    """

    first: StressField
    second: StressField
    coupling: Coupling
    role: Role
    equilibrium_residual: float = 0.0

    def _residuals(self) -> tuple[StressField, StressField]:
        lam = self.coupling.element_lambda()
        if lam is None:
            raise ValueError(
                "λ varies inside an element; evaluate the residual pair pointwise"
            )
        if self.first.model is ModelKind.MEMBRANE:
            lam_flux, lam_reaction = self.coupling.membrane_lambda()
            if lam_reaction != lam_flux:
                flux = inverse_transform(
                    StressField(self.first.model, self.first.flux),
                    StressField(self.second.model, self.second.flux),
                    lam_flux,
                )
                react = inverse_transform(
                    self.first.reaction, self.second.reaction, lam_reaction
                )
                return (
                    StressField(self.first.model, flux[0].flux, react[0]),
                    StressField(self.first.model, flux[1].flux, react[1]),
                )
            return inverse_transform(self.first, self.second, lam_flux)
        return inverse_transform(self.first, self.second, lam)

    @property
    def sigma_res(self) -> StressField:
        return self._residuals()[0]

    @property
    def Sigma_res(self) -> StressField:
        return self._residuals()[1]
