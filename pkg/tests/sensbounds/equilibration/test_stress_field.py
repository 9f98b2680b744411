"""Tests for stress field arithmetic, the λ-transform and the coupling."""

import numpy as np
import pytest

from sensbounds.equilibration import (
    Coupling,
    LambdaRangeError,
    StressField,
    forward_transform,
    inverse_transform,
)
from sensbounds.equilibration.ResidualPair import check_lambda
from sensbounds.forms import build_frame_problem, build_membrane_problem
from sensbounds.parameters import ModelKind, Parameter


def _field(seed: int, n: int = 5) -> StressField:
    rng = np.random.default_rng(seed)
    return StressField(
        ModelKind.MEMBRANE, rng.standard_normal((n, 12)), rng.standard_normal((n, 4))
    )


class TestStressField:
    def test_zeros(self):
        beam = StressField.zeros(ModelKind.FRAME, 3)
        assert beam.flux.shape == (3, 1)
        assert beam.reaction is None
        membrane = StressField.zeros(ModelKind.MEMBRANE, 4)
        assert membrane.reaction.shape == (4, 4)
        assert membrane.max_abs() == 0.0

    def test_add_pads_polynomial_degree(self):
        a = StressField(ModelKind.FRAME, np.array([[1.0, 2.0]]))
        b = StressField(ModelKind.FRAME, np.array([[1.0, 0.0, 3.0]]))
        np.testing.assert_array_equal((a + b).flux, [[2.0, 2.0, 3.0]])
        np.testing.assert_array_equal((a - b).flux, [[0.0, 2.0, -3.0]])

    def test_negation_and_scaling(self):
        field = _field(0)
        np.testing.assert_array_equal((-field).flux, -field.flux)
        factors = np.arange(5.0)
        scaled = field.scaled(factors)
        expected = field.reaction * factors[:, None]
        np.testing.assert_array_equal(scaled.reaction, expected)

    def test_mismatched_meshes(self):
        with pytest.raises(ValueError, match="different meshes"):
            _field(0, n=3) + _field(1, n=4)


class TestTransform:
    @pytest.mark.parametrize("lam", [0.0, 0.3, -0.7, 0.999])
    def test_scalar_roundtrip(self, lam):
        p1, p2 = 1.5, -0.25
        s1, s2 = forward_transform(p1, p2, lam)
        back = inverse_transform(s1, s2, lam)
        assert back[0] == pytest.approx(p1, rel=1e-9)
        assert back[1] == pytest.approx(p2, rel=1e-9)

    def test_field_roundtrip_with_element_lambda(self):
        p1, p2 = _field(2), _field(3)
        lam = np.linspace(-0.5, 0.5, 5)
        s1, s2 = forward_transform(p1, p2, lam)
        q1, q2 = inverse_transform(s1, s2, lam)
        np.testing.assert_allclose(q1.flux, p1.flux, atol=1e-12)
        np.testing.assert_allclose(q2.reaction, p2.reaction, atol=1e-12)


class TestCoupling:
    def test_frame_lambda_lives_on_the_beam(self):
        problem = build_frame_problem(Parameter.BETA1, 2, xi=1.0)
        coupling = Coupling.from_problem(problem)
        lam = coupling.element_lambda()
        beam = problem.mesh.elements_of(problem.mesh.member_index("BC"))
        np.testing.assert_allclose(lam[beam], 0.5)
        assert np.count_nonzero(lam) == len(beam)
        assert coupling.max_abs() == pytest.approx(0.5)

    def test_membrane_lambda(self):
        problem = build_membrane_problem(Parameter.BETA1, 8, xi=1.5)
        coupling = Coupling.from_problem(problem)
        assert coupling.membrane_lambda() == (pytest.approx(0.75), 0.0)
        np.testing.assert_allclose(coupling.element_lambda(), 0.75)

    def test_uncoupled(self):
        coupling = Coupling.uncoupled(build_frame_problem(Parameter.BETA1, 2))
        assert coupling.max_abs() == 0.0

    def test_lambda_range(self):
        problem = build_frame_problem(Parameter.BETA1, 2)
        assert check_lambda(Coupling.from_problem(problem.with_xi(1.9))) < 1.0
        coupling = Coupling(ModelKind.FRAME, 2.5, problem.mesh)
        with pytest.raises(LambdaRangeError, match="needs"):
            check_lambda(coupling)
