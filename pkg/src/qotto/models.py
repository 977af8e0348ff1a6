"""
Concrete systems: the pumped qutrit battery, the four-level engine and their
effective models with the fast level |m> adiabatically eliminated.

All quantities are dimensionless multiples of omega_i (hbar = k_B = 1).
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import ModelError
from .lindblad import DriveSpec, JumpChannel, ModelSpec
from .qcore import DensityMatrix, transition

logger = logging.getLogger(__name__)

STAGES = ("recharge", "discharge")
VALIDITY_WARN = 0.1

BATTERY_LABELS = ("g", "i", "m")
ENGINE_LABELS = ("g", "e", "i", "m")


class BatteryParams(BaseModel):
    """Three-level battery: levels g < i < m, pump on g<->m, bath on m<->i and i<->g."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega_i: float = Field(1.0, gt=0)
    omega_m: float = Field(1.02, gt=0)
    gamma0_i: float = Field(1e-9, ge=0)
    gamma0_m: float = Field(1e-4, ge=0)
    amplitude: float = Field(1e-6, ge=0, description="Pump amplitude Omega")
    drive_frequency: float | None = Field(
        None, gt=0, description="Pump frequency omega_f; resonant with omega_m if unset"
    )
    temperature: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _check_levels(self):
        if not self.omega_m > self.omega_i:
            raise ValueError(
                f"omega_m ({self.omega_m}) must lie above omega_i ({self.omega_i})"
            )
        return self

    @property
    def omega_f(self) -> float:
        if self.drive_frequency is None:
            return self.omega_m
        return self.drive_frequency

    @property
    def detuning(self) -> float:
        """Delta omega = omega_f - omega_m."""
        return self.omega_f - self.omega_m

    def replace(self, **changes: Any):
        """Validated copy with some fields changed."""
        data = self.model_dump()
        if "detuning" in changes:
            detuning = changes.pop("detuning")
            omega_m = changes.get("omega_m", self.omega_m)
            changes["drive_frequency"] = omega_m + detuning
        data.update(changes)
        return type(self).model_validate(data)


class EngineParams(BatteryParams):
    """Four-level engine: the battery plus a level e between g and i."""

    omega_e: float = Field(0.01, gt=0)
    gamma0_e: float = Field(1e-9, ge=0)
    epsilon: float = Field(2e-4, ge=0, description="Discharge pulse amplitude")

    @model_validator(mode="after")
    def _check_extraction_gap(self):
        if not self.omega_e < self.omega_i:
            raise ValueError(
                f"omega_e ({self.omega_e}) must lie below omega_i ({self.omega_i})"
            )
        return self


def thermal_occupation(gap: float, temperature: float) -> float:
    """Bose occupation 1/(e^{gap/T} - 1); exactly 0 at T = 0."""
    if not gap > 0:
        raise ModelError(f"Thermal occupation needs a positive gap, got {gap}")
    if temperature < 0:
        raise ModelError(f"Temperature must be non-negative, got {temperature}")
    if temperature == 0.0:
        return 0.0
    x = gap / temperature
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def natural_rates(gamma0: float, gap: float, temperature: float) -> tuple[float, float]:
    """Return (gamma^+, gamma^-) = (gamma0 n, gamma0 (n + 1))."""
    n = thermal_occupation(gap, temperature)
    return gamma0 * n, gamma0 * (n + 1.0)


def gibbs_state(
    energies: Sequence[float],
    temperature: float,
    labels: Sequence[str] | None = None,
) -> DensityMatrix:
    """e^{-H_0/T}/Z for diagonal H_0; the ground projector at T = 0."""
    if temperature < 0:
        raise ModelError(f"Temperature must be non-negative, got {temperature}")
    energies = np.asarray(energies, dtype=float)
    if temperature == 0.0:
        weights = np.zeros(energies.size)
        weights[int(np.argmin(energies))] = 1.0
    elif math.isinf(temperature):
        weights = np.ones(energies.size)
    else:
        weights = np.exp(-(energies - energies.min()) / temperature)
    return DensityMatrix(np.diag(weights / weights.sum()), labels)


def model_gibbs_state(model: ModelSpec) -> DensityMatrix:
    return gibbs_state(model.level_energies, model.bath_temperature, model.labels)


def _ladder(name: str, upper: str, lower: str, rates, bohr, labels, group) -> list:
    up, down = rates
    return [
        JumpChannel(f"{name}+", transition(upper, lower, labels), up, bohr, group),
        JumpChannel(f"{name}-", transition(lower, upper, labels), down, bohr, group),
    ]


def _battery_channels(params: BatteryParams, labels: tuple[str, ...]) -> list:
    t = params.temperature
    gap_m = params.omega_m - params.omega_i
    channels = _ladder(
        "gamma_m",
        "m",
        "i",
        natural_rates(params.gamma0_m, gap_m, t),
        gap_m,
        labels,
        "gamma_m",
    )
    channels += _ladder(
        "gamma_i",
        "i",
        "g",
        natural_rates(params.gamma0_i, params.omega_i, t),
        params.omega_i,
        labels,
        "gamma_i",
    )
    return channels


def pump_drive(params: BatteryParams) -> DriveSpec:
    return DriveSpec("pump", params.amplitude, params.omega_f, ("g", "m"))


def build_battery3(params: BatteryParams) -> ModelSpec:
    """Three-level battery with the pump drive and the four natural channels."""
    return ModelSpec(
        labels=BATTERY_LABELS,
        level_energies=(0.0, params.omega_i, params.omega_m),
        drives=(pump_drive(params),),
        channels=tuple(_battery_channels(params, BATTERY_LABELS)),
        bath_temperature=params.temperature,
    )


def discharge_duration(params: EngineParams) -> float:
    """tau_d = pi/(2 epsilon) of the pi/2 pulse."""
    if not params.epsilon > 0:
        raise ModelError("Finite-pulse discharge needs epsilon > 0")
    return math.pi / (2.0 * params.epsilon)


def extract_drive(params: EngineParams) -> DriveSpec:
    return DriveSpec(
        "extract", params.epsilon, params.omega_i - params.omega_e, ("e", "i")
    )


def _check_stage(stage: str) -> None:
    if stage not in STAGES:
        raise ModelError(f"Unknown stage {stage!r}; expected one of {STAGES}")


def build_engine4(params: EngineParams, stage: str = "recharge") -> ModelSpec:
    """
    Four-level engine for one stroke.

    Args:
        params: Engine parameters
        stage: "recharge" (pump only) or "discharge" (pump plus resonant V_ext)

    Returns:
        ModelSpec over levels (g, e, i, m) with six channels
    """
    _check_stage(stage)
    labels = ENGINE_LABELS
    channels = _battery_channels(params, labels)
    channels += _ladder(
        "gamma_e",
        "e",
        "g",
        natural_rates(params.gamma0_e, params.omega_e, params.temperature),
        params.omega_e,
        labels,
        "gamma_e",
    )
    drives = [pump_drive(params)]
    if stage == "discharge":
        discharge_duration(params)
        drives.append(extract_drive(params))
    return ModelSpec(
        labels=labels,
        level_energies=(0.0, params.omega_e, params.omega_i, params.omega_m),
        drives=tuple(drives),
        channels=tuple(channels),
        bath_temperature=params.temperature,
    )


def pumping_rate(amplitude: float, gamma_m_minus: float, detuning: float) -> float:
    """p = 4 Omega^2 / (gamma_m^-^2 + 4 Delta omega^2)."""
    if not gamma_m_minus > 0:
        raise ModelError(f"Pumping rate needs gamma_m^- > 0, got {gamma_m_minus}")
    return 4.0 * amplitude**2 / (gamma_m_minus**2 + 4.0 * detuning**2)


def adiabatic_validity(params: BatteryParams) -> float:
    """
    Largest slow rate relative to gamma_m^-.

    For engine parameters the ratio gamma_m^+/min(gamma_i^-, gamma_e^-) is
    folded in as well.
    """
    t = params.temperature
    gm_plus, gm_minus = natural_rates(
        params.gamma0_m, params.omega_m - params.omega_i, t
    )
    if not gm_minus > 0:
        return math.inf
    slow = [params.amplitude, gm_plus, *natural_rates(params.gamma0_i, params.omega_i, t)]
    metric = max(slow) / gm_minus
    if isinstance(params, EngineParams):
        ge = natural_rates(params.gamma0_e, params.omega_e, t)
        metric = max(metric, max(ge) / gm_minus)
        floor = min(natural_rates(params.gamma0_i, params.omega_i, t)[1], ge[1])
        if gm_plus > 0:
            metric = max(metric, gm_plus / floor if floor > 0 else math.inf)
    return metric


def _warn_validity(params: BatteryParams) -> float:
    metric = adiabatic_validity(params)
    if metric > VALIDITY_WARN:
        logger.warning(
            "Adiabatic elimination is questionable: validity metric %.3g > %g",
            metric,
            VALIDITY_WARN,
        )
    return metric


@dataclass(frozen=True)
class EffectiveQubitModel:
    """
    Pumped g<->i transition with |m> eliminated.

    The g<->i pair behaves as a qubit with excitation rate
    gamma_plus = gamma_i^+ + p gamma_m^-, decay gamma_i^- and the level shift
    p*Delta omega on |g>. For the engine the |e> level rides along in
    `model`.
    """

    gamma_plus: float
    gamma_minus: float
    natural_plus: float
    pump_rate: float
    gamma_m_minus: float
    level_shift: float
    validity: float
    model: ModelSpec

    @property
    def pumped_rate(self) -> float:
        """p gamma_m^-"""
        return self.pump_rate * self.gamma_m_minus

    @property
    def hot_temperature(self) -> float:
        return effective_hot_temperature(self, self.model.energy("i"))

    def excited_population(self) -> float:
        """Steady-state rho_ii of the two-level model."""
        total = self.gamma_plus + self.gamma_minus
        return self.gamma_plus / total if total > 0 else 0.0


def _effective_channels(params: BatteryParams, labels: tuple[str, ...], p: float):
    gi_plus, gi_minus = natural_rates(params.gamma0_i, params.omega_i, params.temperature)
    gm_minus = natural_rates(
        params.gamma0_m, params.omega_m - params.omega_i, params.temperature
    )[1]
    return [
        JumpChannel(
            "gamma_i+", transition("i", "g", labels), gi_plus, params.omega_i, "gamma_i"
        ),
        JumpChannel(
            "pump",
            transition("i", "g", labels),
            p * gm_minus,
            params.omega_i,
            "gamma_m",
            work_fraction=params.omega_f / params.omega_i,
        ),
        JumpChannel(
            "gamma_i-", transition("g", "i", labels), gi_minus, params.omega_i, "gamma_i"
        ),
    ]


def _effective(params: BatteryParams, model: ModelSpec, p: float, validity: float):
    gi_plus, gi_minus = natural_rates(params.gamma0_i, params.omega_i, params.temperature)
    gm_minus = natural_rates(
        params.gamma0_m, params.omega_m - params.omega_i, params.temperature
    )[1]
    return EffectiveQubitModel(
        gamma_plus=gi_plus + p * gm_minus,
        gamma_minus=gi_minus,
        natural_plus=gi_plus,
        pump_rate=p,
        gamma_m_minus=gm_minus,
        level_shift=p * params.detuning,
        validity=validity,
        model=model,
    )


def _battery_pump_rate(params: BatteryParams) -> float:
    gm_minus = natural_rates(
        params.gamma0_m, params.omega_m - params.omega_i, params.temperature
    )[1]
    return pumping_rate(params.amplitude, gm_minus, params.detuning)


def build_effective2(params: BatteryParams) -> EffectiveQubitModel:
    """Effective two-level battery (levels g, i)."""
    validity = _warn_validity(params)
    p = _battery_pump_rate(params)
    labels = ("g", "i")
    model = ModelSpec(
        labels=labels,
        level_energies=(0.0, params.omega_i),
        channels=tuple(_effective_channels(params, labels, p)),
        bath_temperature=params.temperature,
        level_shifts=(p * params.detuning, 0.0),
    )
    return _effective(params, model, p, validity)


def build_effective_engine3(
    params: EngineParams, stage: str = "recharge"
) -> EffectiveQubitModel:
    """Effective three-level engine (levels g, e, i); discharge adds resonant V_ext."""
    _check_stage(stage)
    validity = _warn_validity(params)
    p = _battery_pump_rate(params)
    labels = ("g", "e", "i")
    channels = _effective_channels(params, labels, p)
    channels += _ladder(
        "gamma_e",
        "e",
        "g",
        natural_rates(params.gamma0_e, params.omega_e, params.temperature),
        params.omega_e,
        labels,
        "gamma_e",
    )
    drives = ()
    if stage == "discharge":
        discharge_duration(params)
        drives = (extract_drive(params),)
    model = ModelSpec(
        labels=labels,
        level_energies=(0.0, params.omega_e, params.omega_i),
        drives=drives,
        channels=tuple(channels),
        bath_temperature=params.temperature,
        level_shifts=(p * params.detuning, 0.0, 0.0),
    )
    return _effective(params, model, p, validity)


def effective_hot_temperature(model: EffectiveQubitModel, omega_i: float = 1.0) -> float:
    """
    T_H = omega_i / ln(gamma_i^- / (p gamma_m^- + gamma_i^+)).

    Negative under population inversion, math.inf when the ratio is 1 and 0
    when nothing excites the transition.

    Raises:
        ModelError: If gamma_i^- is zero
    """
    if not model.gamma_minus > 0:
        raise ModelError("Effective hot temperature is undefined for gamma_i^- = 0")
    if model.gamma_plus == 0.0:
        return 0.0
    ratio = model.gamma_minus / model.gamma_plus
    if ratio == 1.0:
        return math.inf
    return omega_i / math.log(ratio)


def rabi_flip_population(params: BatteryParams) -> float:
    """Best excited population of a g<->i flip of the Gibbs state: p_i^R = rho_gg."""
    state = gibbs_state(
        (0.0, params.omega_i, params.omega_m), params.temperature, BATTERY_LABELS
    )
    return state.population("g")
