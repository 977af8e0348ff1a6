#!/usr/bin/env python3
"""
Unit tests for the lindblad module.
"""

import dataclasses
import math

import numpy as np
import pytest

from qotto.errors import ConvergenceError, ModelError
from qotto.lindblad import (
    DriveSpec,
    JumpChannel,
    ModelSpec,
    Propagator,
    StepControl,
    dissipator_apply,
    dissipator_superoperator,
    evolve,
    find_ness,
    frame_energies,
    liouvillian,
    rate_scale,
    relaxation_rate,
    slowest_rate,
    steady_state,
    to_lab_frame,
)
from qotto.models import BatteryParams, build_battery3, model_gibbs_state, natural_rates
from qotto.qcore import DensityMatrix, transition

QUBIT = ("g", "i")

# Rates scaled up from the paper preset with the same hierarchy
DESK_BATTERY = BatteryParams(gamma0_m=1e-2, gamma0_i=1e-6, amplitude=math.sqrt(1e-7))


def decay_model(rate: float = 0.1, temperature: float = 0.0) -> ModelSpec:
    up, down = natural_rates(rate, 1.0, temperature)
    return ModelSpec(
        labels=QUBIT,
        level_energies=(0.0, 1.0),
        channels=(
            JumpChannel("gamma_i+", transition("i", "g", QUBIT), up, 1.0),
            JumpChannel("gamma_i-", transition("g", "i", QUBIT), down, 1.0),
        ),
        bath_temperature=temperature,
    )


def random_state(dim: int, seed: int = 3) -> DensityMatrix:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return DensityMatrix(rho / np.trace(rho))


class TestModelSpec:
    """Tests for ModelSpec validation."""

    def test_ground_energy_must_be_zero(self):
        """Test that a shifted ground level is rejected."""
        with pytest.raises(ModelError, match="Ground energy"):
            ModelSpec(labels=QUBIT, level_energies=(0.1, 1.0))

    def test_energies_must_ascend(self):
        """Test that level ordering is enforced."""
        with pytest.raises(ModelError, match="ascend"):
            ModelSpec(labels=("g", "i", "m"), level_energies=(0.0, 1.0, 0.5))

    def test_unknown_frame(self):
        """Test that only the rotating and lab frames exist."""
        with pytest.raises(ModelError, match="frame"):
            ModelSpec(labels=QUBIT, level_energies=(0.0, 1.0), frame="interaction")

    def test_channel_dimension_mismatch(self):
        """Test that channels must act on the model's space."""
        channel = JumpChannel("gamma_i-", transition("g", "i", ("g", "i", "m")), 0.1, 1.0)
        with pytest.raises(ModelError, match="dimension"):
            ModelSpec(labels=QUBIT, level_energies=(0.0, 1.0), channels=(channel,))

    def test_negative_rate(self):
        """Test that a negative channel rate is rejected."""
        with pytest.raises(ModelError, match="negative rate"):
            JumpChannel("gamma_i-", transition("g", "i", QUBIT), -1.0, 1.0)

    def test_level_shift_on_driven_level(self):
        """Test that level shifts cannot touch a driven level."""
        drive = DriveSpec("pump", 1e-3, 1.0, ("g", "i"))
        with pytest.raises(ModelError, match="driven level"):
            ModelSpec(
                labels=QUBIT,
                level_energies=(0.0, 1.0),
                drives=(drive,),
                level_shifts=(0.1, 0.0),
            )

    def test_channel_group_defaults_to_name_stem(self):
        """Test that gamma_i+ and gamma_i- share the gamma_i group."""
        assert decay_model(temperature=0.5).channel_groups() == ("gamma_i",)


class TestGenerator:
    """Tests for the rotating-frame superoperator."""

    def test_superoperator_matches_apply(self):
        """Test the row-major superoperator against direct application."""
        labels = ("g", "i", "m")
        channel = JumpChannel("gamma_m-", transition("i", "m", labels), 0.3, 0.02)
        rho = random_state(3)

        vec = dissipator_superoperator(channel) @ rho.data.reshape(-1)

        assert np.allclose(vec.reshape(3, 3), dissipator_apply(channel, rho).data)

    def test_trace_preserving(self):
        """Test that the battery generator annihilates the trace functional."""
        model = build_battery3(DESK_BATTERY.replace(temperature=0.2, detuning=0.01))
        identity_row = np.eye(3).reshape(-1)

        assert np.max(np.abs(identity_row @ liouvillian(model))) < 1e-15

    def test_detuned_drive_shifts_frame(self):
        """Test that the pumped level moves to the drive frequency in the frame."""
        params = DESK_BATTERY.replace(detuning=0.01)
        model = build_battery3(params)

        energies = frame_energies(model)

        assert energies[model.index("m")] == pytest.approx(params.omega_f)
        assert energies[model.index("i")] == 1.0

    def test_rate_scales(self):
        """Test the fastest and slowest rates of the desk battery."""
        model = build_battery3(DESK_BATTERY)

        assert rate_scale(model) == pytest.approx(1e-2)
        assert slowest_rate(model) == pytest.approx(1e-6)


class TestEvolve:
    """Tests for adaptive integration."""

    def test_spontaneous_decay(self):
        """Test rho_ii(t) = exp(-gamma t) for pure decay."""
        model = decay_model(rate=0.1)

        trajectory = evolve(model, DensityMatrix.pure("i", QUBIT), 10.0)

        assert trajectory.times[-1] == 10.0
        assert trajectory.final_state().population("i") == pytest.approx(math.exp(-1.0), abs=1e-7)

    def test_end_before_start(self):
        """Test that a non-positive duration is rejected."""
        with pytest.raises(ModelError):
            evolve(decay_model(), DensityMatrix.pure("i", QUBIT), 0.0)

    def test_basis_mismatch(self):
        """Test that the state basis must match the model."""
        with pytest.raises(ModelError, match="basis"):
            Propagator(decay_model(), DensityMatrix.maximally_mixed(("g", "e")))

    def test_resumed_run_matches_single_run(self):
        """Test that splitting a run into segments gives the same state."""
        model = build_battery3(DESK_BATTERY.replace(detuning=0.005))
        rho0 = model_gibbs_state(model)

        split = Propagator(model, rho0).advance(500.0).advance(1000.0)
        whole = evolve(model, rho0, 1000.0)

        assert split.t == 1000.0
        assert np.allclose(split.state().data, whole.final_state().data, atol=1e-7)

    def test_trajectory_is_physical(self):
        """Test unit trace at every sample of a charging run."""
        model = build_battery3(DESK_BATTERY)

        trajectory = evolve(model, model_gibbs_state(model), 2e3)

        traces = np.real(np.trace(trajectory.states, axis1=1, axis2=2))
        assert np.allclose(traces, 1.0, atol=1e-12)
        assert trajectory.accepted == len(trajectory) - 1

    def test_index_at(self):
        """Test lookup of the last sample at or before a time."""
        trajectory = evolve(decay_model(), DensityMatrix.pure("i", QUBIT), 5.0)

        k = trajectory.index_at(2.5)

        assert trajectory.times[k] <= 2.5
        assert k + 1 == len(trajectory) or trajectory.times[k + 1] > 2.5

    def test_lab_frame_populations_agree(self):
        """Test that the lab frame only rotates coherences."""
        params = DESK_BATTERY.replace(detuning=0.01)
        rotating = build_battery3(params)
        lab = dataclasses.replace(rotating, frame="lab")
        rho0 = model_gibbs_state(rotating)

        a = evolve(rotating, rho0, 300.0).final_state()
        b = evolve(lab, rho0, 300.0)

        assert b.frame == "lab"
        assert np.allclose(np.diag(a.data), np.diag(b.final_state().data), atol=1e-10)
        assert np.allclose(to_lab_frame(a, rotating, 300.0).data, b.final_state().data, atol=1e-9)

    def test_step_control_validation(self):
        """Test that tolerances must be positive."""
        with pytest.raises(ModelError):
            StepControl(rel_tol=0.0)


class TestFindNess:
    """Tests for the steady-state search."""

    def test_thermal_qubit_reaches_gibbs(self):
        """Test that a bath-only qubit relaxes to its Gibbs state."""
        model = decay_model(rate=0.1, temperature=0.5)

        result = find_ness(model, DensityMatrix.pure("g", QUBIT))

        expected = math.exp(-2.0) / (1.0 + math.exp(-2.0))
        assert result.state.population("i") == pytest.approx(expected, abs=1e-8)
        assert result.tau > 0.0

    def test_desk_battery_population(self):
        """Test rho_ii close to p gamma_m / (p gamma_m + gamma_i) = 40/41."""
        model = build_battery3(DESK_BATTERY)

        result = find_ness(model, model_gibbs_state(model))

        assert result.state.population("i") == pytest.approx(40.0 / 41.0, abs=1e-3)
        assert result.residual <= 1e-10 * rate_scale(model)
        assert np.allclose(result.state.data, steady_state(model).data, atol=1e-12)

    def test_horizon_exceeded(self):
        """Test ConvergenceError when the horizon is too short."""
        model = build_battery3(DESK_BATTERY)

        with pytest.raises(ConvergenceError, match="No steady state"):
            find_ness(model, model_gibbs_state(model), max_time=10.0)

    def test_stops_on_state_distance(self):
        """Test that an unreachable residual bound still ends at the stationary state."""
        model = decay_model(rate=0.1, temperature=0.5)

        result = find_ness(model, DensityMatrix.pure("g", QUBIT), tol=0.0)

        expected = math.exp(-2.0) / (1.0 + math.exp(-2.0))
        assert result.trajectory.final_state().population("i") == pytest.approx(
            expected, abs=1e-8
        )
        assert result.trajectory.times[-1] < 1e3 / relaxation_rate(model)

    def test_warm_battery_horizon(self):
        """Test that the default horizon follows the gap, not the slowest channel."""
        model = build_battery3(DESK_BATTERY.replace(temperature=0.1, detuning=0.02))

        assert 1e3 / relaxation_rate(model) < 1e10 < 1e3 / slowest_rate(model)

    @pytest.mark.slow
    @pytest.mark.parametrize("temperature,detuning", [(0.1, 0.02), (0.05, -0.01)])
    def test_warm_detuned_battery_settles(self, temperature, detuning):
        """Test that a warm battery settles although its uphill i rate is tiny."""
        model = build_battery3(DESK_BATTERY.replace(temperature=temperature, detuning=detuning))

        result = find_ness(model, model_gibbs_state(model))

        marched = result.trajectory.states[-1]
        assert np.max(np.abs(marched - result.state.data)) <= 1e-6
        assert result.trajectory.times[-1] <= 1e3 / relaxation_rate(model)
        assert result.tau <= result.trajectory.times[-1]
        assert result.residual <= 1e-10 * rate_scale(model)

    def test_lab_frame_model_searched_in_rotating_frame(self):
        """Test that a lab-frame model gives the same steady state."""
        model = build_battery3(DESK_BATTERY)
        lab = dataclasses.replace(model, frame="lab")

        result = find_ness(lab, model_gibbs_state(lab))

        assert result.state.population("i") == pytest.approx(40.0 / 41.0, abs=1e-3)


class TestSteadyState:
    """Tests for the direct stationary solve and the relaxation rate."""

    def test_thermal_qubit_is_gibbs(self):
        """Test the null vector of a bath-only qubit."""
        model = decay_model(rate=0.1, temperature=0.5)

        state = steady_state(model)

        expected = math.exp(-2.0) / (1.0 + math.exp(-2.0))
        assert state.population("i") == pytest.approx(expected, abs=1e-12)
        assert np.real(np.trace(state.data)) == pytest.approx(1.0)

    def test_desk_battery_population(self):
        """Test the direct solve against the pump ratio 40/41."""
        state = steady_state(build_battery3(DESK_BATTERY))

        assert state.population("i") == pytest.approx(40.0 / 41.0, abs=1e-3)

    def test_closed_system_is_not_unique(self):
        """Test that a model without dissipation has no unique stationary state."""
        model = ModelSpec(labels=QUBIT, level_energies=(0.0, 1.0))

        with pytest.raises(ModelError, match="not unique"):
            steady_state(model)

    def test_decay_qubit_gap(self):
        """Test the gap gamma/2 set by the decaying coherence."""
        assert relaxation_rate(decay_model(rate=0.1)) == pytest.approx(0.05, rel=1e-9)

    def test_gap_ignores_boltzmann_tail(self):
        """Test that a negligible uphill rate does not set the relaxation time."""
        model = build_battery3(DESK_BATTERY.replace(temperature=0.1))

        assert slowest_rate(model) < 1e-10
        assert relaxation_rate(model) > 1e3 * slowest_rate(model)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
