"""Tests for strict bounds on sensitivities and quantities of interest."""

from math import inf, isnan

import numpy as np
import pytest

from sensbounds.bounds import (
    BoundsReport,
    cre_estimator,
    optimal_kappa,
    quantity_bounds,
    sensitivity_bounds,
    symmetric_bounds,
)
from sensbounds.equilibration import (
    build_admissible_pair,
    qoi_load,
    single_field_residual,
)
from sensbounds.forms import (
    assemble_load,
    assemble_operator,
    assemble_qoi,
    build_frame_problem,
    build_membrane_problem,
)
from sensbounds.linalg import solve_spd
from sensbounds.parameters import Parameter
from sensbounds.sensitivity import SensitivitySystem, evaluate_qoi


# ------------------------------------------------------------------ #
# Helpers
# ------------------------------------------------------------------ #


def bounds_for(problem, target: str) -> BoundsReport:
    system = SensitivitySystem(problem)
    qoi = assemble_qoi(problem, target)
    primal = system.primal_pair()
    adjoint = system.adjoint_pair(qoi)
    return sensitivity_bounds(
        build_admissible_pair(problem, primal),
        build_admissible_pair(problem, adjoint, qoi),
        evaluate_qoi(primal, qoi),
        problem,
    )


def reference_sensitivity(problem, target: str) -> float:
    qoi = assemble_qoi(problem, target)
    return evaluate_qoi(SensitivitySystem(problem).primal_pair(), qoi)


# ------------------------------------------------------------------ #
# Report and kappa
# ------------------------------------------------------------------ #


class TestOptimalKappa:
    def test_ratio(self):
        assert optimal_kappa(4.0, 1.0) == pytest.approx(0.5)

    def test_balances_the_two_halves(self):
        e_p, e_d = 0.3, 0.02
        k = optimal_kappa(e_p, e_d)
        assert 0.5 * (k**2 * e_p**2 + e_d**2 / k**2) == pytest.approx(e_p * e_d)

    def test_degenerate(self):
        assert optimal_kappa(0.0, 1.0) == inf
        assert isnan(optimal_kappa(0.0, 0.0))

    def test_negative(self):
        with pytest.raises(ValueError, match="non-negative"):
            optimal_kappa(-1.0, 1.0)


class TestBoundsReport:
    def test_ordering_enforced(self):
        with pytest.raises(ValueError, match="exceeds"):
            BoundsReport(0.0, 0.0, 1.0, 1.0, upper=-1.0, lower=1.0, kappa=1.0, gap=1.0)

    def test_center_and_contains(self):
        report = BoundsReport(1.0, 0.5, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0)
        assert report.center == 1.5
        assert report.contains(1.2)
        assert not report.contains(2.5)


# ------------------------------------------------------------------ #
# Sensitivity bounds
# ------------------------------------------------------------------ #


class TestSensitivityBounds:
    @pytest.mark.parametrize(
        "parameter, target",
        [(Parameter.BETA1, "Delta_C"), (Parameter.BETA2, "theta_B")],
    )
    def test_frame_bracket_is_strict(self, parameter, target):
        report = bounds_for(build_frame_problem(parameter, 4), target)
        j_ref = reference_sensitivity(build_frame_problem(parameter, 32), target)
        assert report.lower < j_ref < report.upper

    def test_gap_is_product_of_estimators(self):
        report = bounds_for(build_frame_problem(Parameter.BETA1, 4), "Delta_C")
        assert report.gap == report.e_primal * report.e_dual
        assert report.upper - report.lower == pytest.approx(report.gap, rel=1e-13)
        assert report.kappa == pytest.approx(
            (report.e_dual / report.e_primal) ** 0.5
        )

    @pytest.mark.parametrize("xi", [0.25, 1.0, 1.75])
    def test_strict_for_every_admissible_xi(self, xi):
        report = bounds_for(build_frame_problem(Parameter.BETA1, 4, xi=xi), "Delta_C")
        fine = build_frame_problem(Parameter.BETA1, 32)
        j_ref = reference_sensitivity(fine, "Delta_C")
        assert report.lower < j_ref < report.upper

    def test_gap_shrinks_under_refinement(self):
        gaps = [
            bounds_for(build_frame_problem(Parameter.BETA1, n), "Delta_C").gap
            for n in (4, 8)
        ]
        assert gaps[1] < 0.25 * gaps[0]

    def test_pair_roles_checked(self):
        problem = build_frame_problem(Parameter.BETA2, 2)
        residual = build_admissible_pair(
            problem, SensitivitySystem(problem).primal_pair()
        )
        with pytest.raises(ValueError, match=r"\(primal, adjoint\)"):
            sensitivity_bounds(residual, residual, 0.0)

    def test_uncoupled_case_reduces_to_single_field_bounds(self):
        # frame β₂ leaves K unchanged: the block pairs split into u, U and W
        problem = build_frame_problem(Parameter.BETA2, 4, xi=0.5)
        assert not problem.has_stiffness_derivative
        system = SensitivitySystem(problem)
        qoi = assemble_qoi(problem, "theta_B")
        primal = system.primal_pair()
        adjoint = system.adjoint_pair(qoi)
        j_h = evaluate_qoi(primal, qoi)
        report = sensitivity_bounds(
            build_admissible_pair(problem, primal),
            build_admissible_pair(problem, adjoint, qoi),
            j_h,
            problem,
        )

        r_u = single_field_residual(problem, primal.first, problem.load)
        r_U = single_field_residual(
            problem, primal.second, problem.load_prime.scaled(problem.xi)
        )
        r_W = single_field_residual(
            problem, adjoint.second, qoi_load(problem, qoi, 1.0 / problem.xi)
        )
        split = symmetric_bounds(r_U, r_W, j_h)
        e_p = float(np.hypot(cre_estimator(r_u).value, split.e_primal))
        e_d = split.e_dual
        assert not np.any(adjoint.first)
        assert report.e_primal == pytest.approx(e_p, rel=1e-12)
        assert report.e_dual == pytest.approx(e_d, rel=1e-12)
        tol = 1e-12 * e_p * e_d
        assert report.correction == pytest.approx(split.correction, abs=tol)
        half = 0.5 * e_p * e_d
        assert report.upper == pytest.approx(split.center + half, rel=1e-12)
        assert report.lower == pytest.approx(split.center - half, rel=1e-12)
        assert report.kappa == pytest.approx(optimal_kappa(e_p, e_d), rel=1e-12)

    @pytest.mark.slow
    @pytest.mark.parametrize("parameter", [Parameter.BETA1, Parameter.BETA2])
    def test_membrane_bracket_is_strict(self, parameter):
        report = bounds_for(build_membrane_problem(parameter, 8), "average")
        j_ref = reference_sensitivity(build_membrane_problem(parameter, 128), "average")
        assert report.lower < j_ref < report.upper


# ------------------------------------------------------------------ #
# Quantity bounds
# ------------------------------------------------------------------ #


class TestQuantityBounds:
    def test_frame_quantity_is_bracketed(self):
        coarse = build_frame_problem(Parameter.BETA1, 2)
        report = quantity_bounds(coarse, assemble_qoi(coarse, "Delta_C"))
        fine = build_frame_problem(Parameter.BETA1, 32)
        u = solve_spd(assemble_operator(fine), assemble_load(fine))
        assert report.contains(assemble_qoi(fine, "Delta_C")(u))
        assert report.gap > 0.0

    def test_membrane_quantity_is_bracketed(self):
        coarse = build_membrane_problem(Parameter.BETA1, 8)
        report = quantity_bounds(coarse, assemble_qoi(coarse, "average"), {"h": 0.125})
        fine = build_membrane_problem(Parameter.BETA1, 64)
        u = solve_spd(assemble_operator(fine), assemble_load(fine))
        assert report.contains(assemble_qoi(fine, "average")(u))
        assert report.meta == {"h": 0.125}

    def test_symmetric_bounds_reject_coupled_pairs(self):
        problem = build_frame_problem(Parameter.BETA1, 2)
        coupled = build_admissible_pair(
            problem, SensitivitySystem(problem).primal_pair()
        )
        u = solve_spd(assemble_operator(problem), assemble_load(problem))
        plain = single_field_residual(problem, u, problem.load)
        with pytest.raises(ValueError, match="uncoupled"):
            symmetric_bounds(coupled, plain, 0.0)
