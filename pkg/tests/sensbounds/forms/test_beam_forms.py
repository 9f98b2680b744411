"""Tests for Hermite beam elements and the portal frame problem."""

import numpy as np
import pytest

from sensbounds.forms import (
    FRAME_QOIS,
    BeamLoad,
    PointLoad,
    assemble_load,
    assemble_operator,
    assemble_qoi,
    build_frame_problem,
    consistent_load,
    curvature_polynomial,
    element_beam,
    hermite_second,
    hermite_values,
)
from sensbounds.linalg import solve_spd
from sensbounds.mesh import (
    FrameGeometry,
    StiffnessProfile,
    build_frame_mesh,
    gauss_rule,
)
from sensbounds.parameters import Parameter


# ------------------------------------------------------------------ #
# Helpers
# ------------------------------------------------------------------ #


def _single_element(length: float = 0.5, profile: StiffnessProfile | None = None):
    mesh = build_frame_mesh(FrameGeometry.clamped_beam(length, profile), 1)
    return mesh.elements[0], mesh.members[0].stiffness_profile


# ------------------------------------------------------------------ #
# Shape functions
# ------------------------------------------------------------------ #


class TestHermiteShapes:
    def test_nodal_interpolation(self):
        h = 0.3
        values = hermite_values(np.array([0.0, h]), h)
        np.testing.assert_allclose(values[0], [1.0, 0.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(values[1], [0.0, 0.0, 1.0, 0.0], atol=1e-15)

    def test_translation_partition_of_unity(self):
        x = np.linspace(0.0, 0.7, 9)
        values = hermite_values(x, 0.7)
        np.testing.assert_allclose(values[:, 0] + values[:, 2], 1.0, atol=1e-14)

    def test_curvature_of_cubic(self):
        h = 0.5
        # w = x³: w(0)=0, w'(0)=0, w(h)=h³, w'(h)=3h²
        d = np.array([0.0, 0.0, h**3, 3.0 * h**2])
        coef = curvature_polynomial(d, h)
        np.testing.assert_allclose(coef, [0.0, 6.0], atol=1e-13)
        x = np.array([0.1, 0.4])
        np.testing.assert_allclose(hermite_second(x, h) @ d, 6.0 * x, atol=1e-13)


class TestElementMatrices:
    def test_constant_stiffness_closed_form(self):
        element, profile = _single_element(0.5, StiffnessProfile.constant(2.0))
        k = element_beam(element, profile).stiffness
        h = 0.5
        expected = (2.0 / h**3) * np.array(
            [
                [12.0, 6.0 * h, -12.0, 6.0 * h],
                [6.0 * h, 4.0 * h**2, -6.0 * h, 2.0 * h**2],
                [-12.0, -6.0 * h, 12.0, -6.0 * h],
                [6.0 * h, 2.0 * h**2, -6.0 * h, 4.0 * h**2],
            ]
        )
        np.testing.assert_allclose(k, expected, rtol=1e-13)

    def test_tapered_stiffness_matches_fine_quadrature(self):
        profile = StiffnessProfile.tapered(1.0, 1.0)
        element, _ = _single_element(1.0, profile)
        k = element_beam(element, profile).stiffness
        x, w = gauss_rule(20).on_interval(0.0, 1.0)
        B = hermite_second(x, 1.0)
        reference = B.T @ (w[:, None] * profile.value(x)[:, None] * B)
        np.testing.assert_allclose(k, reference, rtol=1e-12, atol=1e-12)

    def test_rigid_modes_carry_no_energy(self):
        element, profile = _single_element(0.4, StiffnessProfile.tapered(1.0, 1.0))
        k = element_beam(element, profile).stiffness
        translation = np.array([1.0, 0.0, 1.0, 0.0])
        rotation = np.array([0.0, 1.0, 0.4, 1.0])
        np.testing.assert_allclose(k @ translation, 0.0, atol=1e-12)
        np.testing.assert_allclose(k @ rotation, 0.0, atol=1e-12)

    def test_consistent_load_resultant(self):
        f = consistent_load(3.0, 0.25)
        assert f[0] + f[2] == pytest.approx(0.75)
        assert f[1] == pytest.approx(-f[3])


# ------------------------------------------------------------------ #
# Portal frame problem
# ------------------------------------------------------------------ #


class TestPortalFrameProblem:
    def test_beta1_couples_stiffness(self):
        problem = build_frame_problem(Parameter.BETA1, 4)
        assert problem.has_stiffness_derivative
        assert problem.xi_max == pytest.approx(2.0)
        assert not assemble_operator(problem, "K'").is_zero()
        assert not np.any(assemble_load(problem, "f'"))

    def test_beta2_only_moves_the_load(self):
        problem = build_frame_problem(Parameter.BETA2, 4)
        assert not problem.has_stiffness_derivative
        assert problem.xi_max == np.inf
        assert assemble_operator(problem, "K'").is_zero()
        f_prime = assemble_load(problem, "f'")
        assert np.any(f_prime)

    def test_load_prime_is_derivative_of_load(self):
        # f(β₂) is quadratic in β₂: f' = (f(β+δ) - f(β-δ)) / 2δ exactly
        delta = 0.1
        up = build_frame_problem(Parameter.BETA2, 3, beta=(1.0, 1.0 + delta))
        down = build_frame_problem(Parameter.BETA2, 3, beta=(1.0, 1.0 - delta))
        mean = build_frame_problem(Parameter.BETA2, 3)
        fd = (assemble_load(up, "f") - assemble_load(down, "f")) / (2.0 * delta)
        np.testing.assert_allclose(fd, assemble_load(mean, "f'"), atol=1e-14)

    def test_xi_outside_range(self):
        with pytest.raises(ValueError, match="outside admissible range"):
            build_frame_problem(Parameter.BETA1, 2, xi=2.5)

    def test_xi_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            build_frame_problem(Parameter.BETA2, 2, xi=0.0)

    def test_with_xi(self):
        problem = build_frame_problem(Parameter.BETA1, 2)
        assert problem.with_xi(1.5).xi == 1.5
        with pytest.raises(ValueError):
            problem.with_xi(2.0)

    def test_stiffness_is_positive_definite(self):
        K = assemble_operator(build_frame_problem(Parameter.BETA1, 3), "K").to_dense()
        assert np.all(np.linalg.eigvalsh(K) > 0.0)

    def test_horizontal_load_sways_right(self):
        problem = build_frame_problem(Parameter.BETA1, 8)
        u = solve_spd(assemble_operator(problem), assemble_load(problem))
        assert assemble_qoi(problem, "Delta_C")(u) > 0.0

    @pytest.mark.xfail(strict=False, reason="frame supports reconstructed from text")
    def test_published_quantities(self):
        problem = build_frame_problem(Parameter.BETA1, 50)
        u = solve_spd(assemble_operator(problem), assemble_load(problem))
        sway = assemble_qoi(problem, "Delta_C")(u)
        rotation = assemble_qoi(problem, "theta_B")(u)
        assert sway == pytest.approx(0.0430866, rel=0.05)
        assert rotation == pytest.approx(0.0444687, rel=0.05)


class TestFrameQoI:
    def test_aliases(self):
        assert set(FRAME_QOIS) == {"Delta_C", "theta_B"}

    def test_point_dof_has_load_form(self):
        problem = build_frame_problem(Parameter.BETA2, 2)
        qoi = assemble_qoi(problem, "theta_B")
        assert qoi.kind == "point-dof"
        assert isinstance(qoi.load, BeamLoad)
        resolved = qoi.load.resolve(problem.mesh)
        np.testing.assert_array_equal(resolved.nodal, qoi.extraction_vector)

    def test_interior_point_has_no_load_form(self):
        problem = build_frame_problem(Parameter.BETA2, 2)
        qoi = assemble_qoi(problem, "BC@0.5:w")
        assert qoi.load is None
        assert qoi.extraction_vector.sum() == pytest.approx(1.0)

    def test_custom_vector_shape(self):
        problem = build_frame_problem(Parameter.BETA2, 2)
        with pytest.raises(ValueError, match="Extraction vector"):
            assemble_qoi(problem, np.ones(3))

    def test_zero_extraction_vector(self):
        problem = build_frame_problem(Parameter.BETA2, 2)
        with pytest.raises(ValueError, match="zero extraction vector"):
            assemble_qoi(problem, np.zeros(problem.mesh.n_free))


class TestBeamLoad:
    def test_scaled(self):
        load = BeamLoad(
            distributed=(("BC", -1.0),), points=(PointLoad("C", fx=2.0),)
        ).scaled(0.5)
        assert load.distributed == (("BC", -0.5),)
        assert load.points[0].fx == 1.0

    def test_point_load_on_sway(self):
        mesh = build_frame_mesh(FrameGeometry.portal(), 2)
        resolved = BeamLoad(points=(PointLoad("C", fx=3.0),)).resolve(mesh)
        assert resolved.nodal[mesh.named_dof("sway")] == 3.0
        assert resolved.scale == 3.0
