#!/usr/bin/env python3
"""
Unit tests for the integrator module.
"""

import math

import numpy as np
import pytest

from qotto.integrator import (
    A,
    ERROR_WEIGHTS,
    EVAL_STAGES,
    WEIGHTS,
    DormandPrince54,
    PIController,
    scaled_error,
)


class TestTableau:
    """Tests for the Dormand-Prince coefficients."""

    def test_row_sums_match_nodes(self):
        """Test that each stage row sums to its evaluation node."""
        assert np.allclose(A.sum(axis=1), EVAL_STAGES)

    def test_weights_sum_to_one(self):
        """Test the 5th order quadrature weights."""
        assert WEIGHTS.sum() == pytest.approx(1.0)

    def test_error_weights_sum_to_zero(self):
        """Test that the embedded difference vanishes on constants."""
        assert ERROR_WEIGHTS.sum() == pytest.approx(0.0, abs=1e-12)

    def test_first_same_as_last(self):
        """Test that the last stage state is the step result."""
        assert np.allclose(A[-1], WEIGHTS)


class TestDormandPrince54:
    """Tests for single steps of the stepper."""

    def test_scalar_decay(self):
        """Test one step of y' = -y against exp(-h)."""
        stepper = DormandPrince54(np.array([[-1.0]], dtype=complex))
        y = np.array([1.0 + 0j])

        attempt = stepper.attempt(y, 0.1, stepper.slope(y), 1e-8, 1e-12)

        assert attempt.y_new[0].real == pytest.approx(math.exp(-0.1), abs=1e-8)
        assert attempt.error < 1.0

    def test_rotation_keeps_norm(self):
        """Test a step of y' = i y stays on the unit circle."""
        stepper = DormandPrince54(np.array([[1j]]))
        y = np.array([1.0 + 0j])

        attempt = stepper.attempt(y, 0.05, stepper.slope(y), 1e-8, 1e-12)

        assert abs(attempt.y_new[0]) == pytest.approx(1.0, abs=1e-9)
        assert attempt.y_new[0] == pytest.approx(np.exp(0.05j), abs=1e-9)

    def test_stage_states_exposed(self):
        """Test that the attempt carries every stage state."""
        stepper = DormandPrince54(np.array([[-2.0]], dtype=complex))
        y = np.array([1.0 + 0j])

        attempt = stepper.attempt(y, 0.1, stepper.slope(y), 1e-8, 1e-12)

        assert attempt.stage_states.shape == (7, 1)
        assert attempt.stage_states[0, 0] == 1.0
        assert attempt.stage_states[-1, 0] == attempt.y_new[0]

    def test_large_step_reports_large_error(self):
        """Test that an overly long step is flagged for rejection."""
        stepper = DormandPrince54(np.array([[-1.0]], dtype=complex))
        y = np.array([1.0 + 0j])

        attempt = stepper.attempt(y, 3.0, stepper.slope(y), 1e-10, 1e-14)

        assert attempt.error > 1.0


class TestScaledError:
    """Tests for the mixed-tolerance error norm."""

    def test_zero_delta(self):
        """Test that no difference gives zero error."""
        y = np.ones(4, dtype=complex)

        assert scaled_error(np.zeros(4), y, y, 1e-8, 1e-12) == 0.0

    def test_absolute_floor(self):
        """Test that the absolute tolerance applies to zero components."""
        zero = np.zeros(1, dtype=complex)

        assert scaled_error(np.array([1e-12]), zero, zero, 1e-8, 1e-12) == pytest.approx(1.0)


class TestPIController:
    """Tests for step-size control."""

    def test_rejected_step_never_grows(self):
        """Test that a rejection shrinks the step."""
        controller = PIController()

        assert controller.next_step(1.0, 4.0, accepted=False) < 1.0

    def test_growth_is_capped(self):
        """Test the upper clip on the growth factor."""
        controller = PIController()

        assert controller.next_step(1.0, 1e-20, accepted=True) == pytest.approx(10.0)

    def test_shrink_is_capped(self):
        """Test the lower clip on the shrink factor."""
        controller = PIController()

        assert controller.next_step(1.0, 1e12, accepted=False) == pytest.approx(0.2)

    def test_accepted_step_updates_memory(self):
        """Test that the integral memory follows accepted errors only."""
        controller = PIController()

        controller.next_step(1.0, 0.5, accepted=True)
        controller.next_step(1.0, 3.0, accepted=False)

        assert controller.previous_error == 0.5


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
