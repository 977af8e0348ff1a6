#!/usr/bin/env python3
"""
Unit tests for the models module.
"""

import logging
import math

import pytest
from pydantic import ValidationError

from qotto.errors import ModelError
from qotto.models import (
    BatteryParams,
    EngineParams,
    adiabatic_validity,
    build_battery3,
    build_effective2,
    build_effective_engine3,
    build_engine4,
    discharge_duration,
    effective_hot_temperature,
    gibbs_state,
    natural_rates,
    pumping_rate,
    rabi_flip_population,
    thermal_occupation,
)

DESK_BATTERY = BatteryParams(gamma0_m=1e-2, gamma0_i=1e-6, amplitude=math.sqrt(1e-7))
DESK_ENGINE = EngineParams(
    gamma0_m=1e-2, gamma0_i=1e-6, gamma0_e=1e-6, amplitude=math.sqrt(1e-7), epsilon=2e-2
)


class TestParams:
    """Tests for parameter validation."""

    def test_defaults(self):
        """Test the default battery parameters."""
        params = BatteryParams()

        assert params.omega_f == params.omega_m == 1.02
        assert params.detuning == 0.0

    def test_pumped_level_must_lie_above(self):
        """Test that omega_m <= omega_i is rejected."""
        with pytest.raises(ValidationError, match="omega_m"):
            BatteryParams(omega_m=0.9)

    def test_negative_amplitude(self):
        """Test that a negative pump amplitude is rejected."""
        with pytest.raises(ValidationError):
            BatteryParams(amplitude=-1e-6)

    def test_unknown_field(self):
        """Test that typos in field names are rejected."""
        with pytest.raises(ValidationError):
            BatteryParams(gamma_m=1e-4)

    def test_extraction_level_below_storage(self):
        """Test that omega_e >= omega_i is rejected."""
        with pytest.raises(ValidationError, match="omega_e"):
            EngineParams(omega_e=1.5)

    def test_replace_detuning(self):
        """Test that a detuning change moves the drive frequency."""
        params = BatteryParams().replace(detuning=0.01)

        assert params.omega_f == pytest.approx(1.03)
        assert params.detuning == pytest.approx(0.01)

    def test_replace_keeps_type(self):
        """Test that replace returns the same parameter class."""
        assert isinstance(DESK_ENGINE.replace(temperature=0.1), EngineParams)

    def test_replace_validates(self):
        """Test that replace revalidates the copy."""
        with pytest.raises(ValidationError):
            DESK_BATTERY.replace(temperature=-1.0)


class TestThermalRates:
    """Tests for Bose occupation and natural rates."""

    def test_zero_temperature(self):
        """Test n = 0 at T = 0."""
        assert thermal_occupation(1.0, 0.0) == 0.0

    def test_bose_occupation(self):
        """Test n = 1/(e^{gap/T} - 1)."""
        assert thermal_occupation(1.0, 1.0) == pytest.approx(1.0 / (math.e - 1.0))

    def test_detailed_balance(self):
        """Test gamma^+/gamma^- = exp(-gap/T)."""
        up, down = natural_rates(1e-4, 0.02, 0.05)

        assert up / down == pytest.approx(math.exp(-0.02 / 0.05))

    def test_non_positive_gap(self):
        """Test that the occupation needs a positive gap."""
        with pytest.raises(ModelError):
            thermal_occupation(0.0, 1.0)

    def test_gibbs_limits(self):
        """Test the ground projector at T = 0 and the uniform state at T = inf."""
        energies = (0.0, 1.0, 1.02)

        assert gibbs_state(energies, 0.0).population("g") == 1.0
        assert gibbs_state(energies, math.inf).population("m") == pytest.approx(1.0 / 3.0)

    def test_gibbs_ratio(self):
        """Test Boltzmann ratios of the Gibbs state."""
        rho = gibbs_state((0.0, 1.0, 1.02), 0.5)

        assert rho.population("i") / rho.population("g") == pytest.approx(math.exp(-2.0))


class TestModels:
    """Tests for the model builders."""

    def test_battery_structure(self):
        """Test levels, pump and channels of the three-level battery."""
        model = build_battery3(DESK_BATTERY)

        assert model.labels == ("g", "i", "m")
        assert model.level_energies == (0.0, 1.0, 1.02)
        assert model.drive("pump").transition == ("g", "m")
        assert len(model.channels) == 4
        assert model.channel_groups() == ("gamma_m", "gamma_i")

    def test_engine_stages(self):
        """Test that only the discharge stroke carries the extraction drive."""
        recharge = build_engine4(DESK_ENGINE, "recharge")
        discharge = build_engine4(DESK_ENGINE, "discharge")

        assert recharge.drive("extract") is None
        assert discharge.drive("extract").transition == ("e", "i")
        assert discharge.drive("extract").frequency == pytest.approx(0.99)
        assert len(recharge.channels) == 6

    def test_unknown_stage(self):
        """Test that only recharge and discharge strokes exist."""
        with pytest.raises(ModelError, match="stage"):
            build_engine4(DESK_ENGINE, "idle")

    def test_discharge_duration(self):
        """Test tau_d = pi/(2 epsilon)."""
        assert discharge_duration(DESK_ENGINE) == pytest.approx(math.pi / 4e-2)

    def test_discharge_needs_pulse(self):
        """Test that a zero pulse amplitude has no discharge stroke."""
        with pytest.raises(ModelError):
            discharge_duration(DESK_ENGINE.replace(epsilon=0.0))


class TestPumping:
    """Tests for the pumping rate and the effective models."""

    def test_resonant_pumping_rate(self):
        """Test p = 4 Omega^2 / gamma_m^2 on resonance."""
        assert pumping_rate(1e-6, 1e-4, 0.0) == pytest.approx(4e-4)

    def test_detuned_pumping_rate(self):
        """Test the Lorentzian suppression with detuning."""
        assert pumping_rate(1e-6, 1e-4, 5e-5) == pytest.approx(2e-4)

    def test_pumping_needs_decay(self):
        """Test that gamma_m^- = 0 is rejected."""
        with pytest.raises(ModelError):
            pumping_rate(1e-6, 0.0, 0.0)

    def test_effective_battery(self):
        """Test rates and steady population of the effective qubit."""
        qubit = build_effective2(DESK_BATTERY)

        assert qubit.pumped_rate == pytest.approx(4e-5)
        assert qubit.gamma_minus == pytest.approx(1e-6)
        assert qubit.excited_population() == pytest.approx(40.0 / 41.0)
        assert qubit.model.labels == ("g", "i")

    def test_effective_level_shift(self):
        """Test the p * detuning shift on the ground level."""
        params = DESK_BATTERY.replace(detuning=1e-3)
        qubit = build_effective2(params)

        assert qubit.level_shift == pytest.approx(qubit.pump_rate * 1e-3)
        assert qubit.model.level_shifts[0] == qubit.level_shift

    def test_effective_engine_levels(self):
        """Test the three-level effective engine."""
        qubit = build_effective_engine3(DESK_ENGINE, "discharge")

        assert qubit.model.labels == ("g", "e", "i")
        assert qubit.model.drive("extract") is not None

    def test_hot_temperature_inverted(self):
        """Test a negative effective temperature under inversion."""
        qubit = build_effective2(DESK_BATTERY)

        expected = 1.0 / math.log(1e-6 / 4e-5)
        assert effective_hot_temperature(qubit) == pytest.approx(expected)
        assert qubit.hot_temperature < 0.0

    def test_hot_temperature_unpumped(self):
        """Test T_H = 0 with neither pump nor thermal excitation."""
        qubit = build_effective2(DESK_BATTERY.replace(amplitude=0.0))

        assert effective_hot_temperature(qubit) == 0.0

    def test_rabi_flip_at_zero_temperature(self):
        """Test that a flip of the ground state fully inverts."""
        assert rabi_flip_population(DESK_BATTERY) == 1.0

    def test_rabi_flip_hot(self):
        """Test p_i^R = rho_gg of the Gibbs state."""
        params = BatteryParams(omega_m=5.0, temperature=0.5)
        z = 1.0 + math.exp(-2.0) + math.exp(-10.0)

        assert rabi_flip_population(params) == pytest.approx(1.0 / z)


class TestValidity:
    """Tests for the adiabatic-elimination validity metric."""

    def test_desk_is_valid(self):
        """Test that the desk rates keep the hierarchy."""
        assert adiabatic_validity(DESK_BATTERY) < 0.1

    def test_warning_when_questionable(self, caplog):
        """Test the warning for a pump comparable to gamma_m."""
        params = DESK_BATTERY.replace(amplitude=5e-3)

        with caplog.at_level(logging.WARNING, logger="qotto.models"):
            build_effective2(params)

        assert "Adiabatic elimination" in caplog.text

    def test_no_warning_when_valid(self, caplog):
        """Test that valid parameters log nothing."""
        with caplog.at_level(logging.WARNING, logger="qotto.models"):
            build_effective2(DESK_BATTERY)

        assert caplog.text == ""


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
