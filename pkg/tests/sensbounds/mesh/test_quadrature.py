"""Tests for Gauss–Legendre rules."""

import numpy as np
import pytest

from sensbounds.mesh import gauss_rule


def _monomial_integral(k: int) -> float:
    """∫_{-1}^{1} x^k dx."""
    return 0.0 if k % 2 else 2.0 / (k + 1)


class TestGaussRule1D:
    @pytest.mark.parametrize("order", [1, 2, 3, 5, 8, 15, 30])
    def test_weights_sum_to_measure(self, order):
        rule = gauss_rule(order, dim=1)
        assert rule.measure == 2.0
        assert rule.weights.sum() == pytest.approx(rule.measure, abs=1e-13)

    @pytest.mark.parametrize("order", [1, 2, 4, 7, 12])
    def test_exact_up_to_degree(self, order):
        rule = gauss_rule(order, dim=1)
        for k in range(rule.degree + 1):
            value = rule.integrate(lambda x: x[:, 0] ** k)
            assert value == pytest.approx(_monomial_integral(k), abs=1e-13)

    def test_not_exact_beyond_degree(self):
        rule = gauss_rule(2, dim=1)
        value = rule.integrate(lambda x: x[:, 0] ** 4)
        assert abs(value - 0.4) > 1e-3

    def test_on_interval_maps_points_and_weights(self):
        x, w = gauss_rule(3, dim=1).on_interval(0.0, 0.25)
        assert np.all((x > 0.0) & (x < 0.25))
        assert w.sum() == pytest.approx(0.25)
        assert float(w @ x**2) == pytest.approx(0.25**3 / 3.0)

    def test_rules_are_cached_and_read_only(self):
        rule = gauss_rule(4, dim=1)
        assert gauss_rule(4, dim=1) is rule
        with pytest.raises(ValueError):
            rule.points[0, 0] = 1.0


class TestGaussRule2D:
    def test_tensor_product_exactness(self):
        rule = gauss_rule(3, dim=2)
        assert rule.weights.sum() == pytest.approx(4.0)
        value = rule.integrate(lambda p: p[:, 0] ** 4 * p[:, 1] ** 2)
        assert value == pytest.approx(0.4 * (2.0 / 3.0), abs=1e-13)

    def test_on_unit_square(self):
        xi, eta, w = gauss_rule(2, dim=2).on_unit_square()
        assert w.sum() == pytest.approx(1.0)
        assert float(w @ (xi * eta)) == pytest.approx(0.25)

    def test_on_interval_rejects_2d(self):
        with pytest.raises(ValueError, match="1D rule"):
            gauss_rule(2, dim=2).on_interval(0.0, 1.0)


class TestGaussRuleValidation:
    @pytest.mark.parametrize("order", [0, 31])
    def test_order_out_of_range(self, order):
        with pytest.raises(ValueError, match="Unsupported Gauss order"):
            gauss_rule(order)

    def test_dimension(self):
        with pytest.raises(ValueError, match="dimension"):
            gauss_rule(2, dim=3)
