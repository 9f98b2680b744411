"""Admissible range of the coupling weight ξ."""

from dataclasses import dataclass

from sensbounds.forms import ParamProblem


@dataclass(slots=True, frozen=True)
class XiValidation:
    """
    Coercivity data of the block form.

    Coefficients are normalized so the symmetric part has α = 1; ψ is then the
    largest ratio |coef'/coef| and xi_max = 2α/ψ (∞ when nothing couples).
    """

    alpha: float
    psi: float
    xi_max: float

    def admits(self, xi: float) -> bool:
        return 0.0 < xi < self.xi_max


def validate_xi(problem: ParamProblem) -> XiValidation:
    """
    Beam: ψ = max_s |EI'(s)/EI(s)|. Membrane: ψ = max(|a'|/a, |k'|/k).

    The problem's own construction already rejected ξ outside (0, xi_max);
    this reports the numbers behind that check.
    """
    psi = problem.coefficient_ratio()
    return XiValidation(alpha=1.0, psi=psi, xi_max=problem.xi_max)
