"""Tests for the finite-difference oracle."""

import pytest

from sensbounds.forms import LoadVariant
from sensbounds.harness import (
    CaseConfig,
    OracleResult,
    fd_oracle,
    oracle_deltas,
    quantity_at,
    richardson,
)
from sensbounds.harness.Oracle import KINKED_POWERS


class TestOracleDeltas:
    def test_smooth_cases_use_config(self):
        config = CaseConfig("frame-J1", (2, 4), fd_deltas=(0.1, 0.05))
        assert oracle_deltas(config) == (0.1, 0.05)
        assert oracle_deltas(config, (0.2,)) == (0.2,)

    def test_membrane_beta2_defaults_to_mesh_multiples(self):
        config = CaseConfig.preset("membrane-J2")
        h = 1.0 / 128
        assert oracle_deltas(config) == (h, 2.0 * h, 4.0 * h)
        assert oracle_deltas(config, (3.0 * h,)) == (3.0 * h,)

    @pytest.mark.parametrize("delta", [0.01, 0.5 / 128])
    def test_membrane_beta2_rejects_off_mesh_steps(self, delta):
        with pytest.raises(ValueError, match="not a multiple"):
            oracle_deltas(CaseConfig.preset("membrane-J2"), (delta,))

    def test_membrane_beta2_ladder_stops_at_half_the_mean_width(self):
        # 4h = 1/8 would shrink the load region to nothing
        config = CaseConfig("membrane-J2", (8,), reference_mesh=32)
        assert oracle_deltas(config) == (1 / 32, 2 / 32)
        with pytest.raises(ValueError, match="half the mean load half-width"):
            oracle_deltas(config, (1 / 32, 4 / 32))

    def test_membrane_beta2_reference_too_coarse(self):
        config = CaseConfig("membrane-J2", (4,), reference_mesh=8)
        with pytest.raises(ValueError, match="too coarse"):
            oracle_deltas(config)


class TestRichardson:
    def test_removes_even_powers(self):
        deltas = [0.4, 0.2, 0.1]
        estimates = [3.0 + 2.0 * d**2 - d**4 for d in deltas]
        assert richardson(deltas, estimates) == pytest.approx(3.0, abs=1e-12)

    def test_kinked_series(self):
        deltas = [0.2, 0.1]
        estimates = [1.0 + 0.5 * d for d in deltas]
        assert richardson(deltas, estimates, KINKED_POWERS) == pytest.approx(1.0)

    def test_single_estimate(self):
        assert richardson([0.1], [2.5]) == pytest.approx(2.5)

    def test_mismatch(self):
        with pytest.raises(ValueError, match="one estimate per delta"):
            richardson([0.1, 0.2], [1.0])


class TestOracleResult:
    def test_agreement_and_noise(self):
        result = OracleResult("frame-J1", 1.001, 1.0, (0.1,), (1.001,), spread=2e-3)
        assert result.relative_difference == pytest.approx(1e-3)
        assert result.agrees()
        assert not result.agrees(1e-4)
        assert result.noisy


class TestFdOracle:
    def test_quantity_is_deterministic(self):
        config = CaseConfig("frame-J1", (2,), reference_mesh=4)
        assert quantity_at(config, (1.0, 1.0)) == quantity_at(config, (1.0, 1.0))

    def test_frame_beta2_matches_block_solve(self):
        # f is quadratic in β₂ and K does not depend on it, so central
        # differences are exact up to round-off.
        config = CaseConfig("frame-J2", (2,), reference_mesh=8)
        result = fd_oracle(config)
        assert result.variants == {}
        assert result.relative_difference < 1e-7
        assert not result.noisy
        assert result.agrees()

    def test_frame_beta1(self):
        config = CaseConfig("frame-J1", (2,), reference_mesh=8)
        result = fd_oracle(config)
        assert len(result.estimates) == len(config.fd_deltas)
        assert result.agrees()

    @pytest.mark.slow
    def test_membrane_beta2_reports_both_variants(self):
        config = CaseConfig("membrane-J2", (8,), reference_mesh=32)
        result = fd_oracle(config)
        assert set(result.variants) == {v.value for v in LoadVariant}
        assert result.j_ref == result.variants["boundary_f"]
        assert result.deltas == (1 / 32, 2 / 32)
        assert len(result.estimates) == 2

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "case_id", ["frame-J1", "frame-J2", "membrane-J1", "membrane-J2"]
    )
    def test_reference_mesh_agreement(self, case_id):
        result = fd_oracle(CaseConfig.preset(case_id))
        assert result.relative_difference <= 0.005
