"""
Scenario configuration files.
Parses, validates and writes the flat key=value scenario format and holds the
per-scenario preset templates.
"""

import logging
import math
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .common import format_value
from .config import META_SUFFIX, PRESETS, RESOLVED_SUFFIX, SCENARIOS
from .engine import CycleConfig
from .errors import ConfigError
from .lindblad import SETTLE_TOL
from .models import (
    BatteryParams,
    EngineParams,
    adiabatic_validity,
    natural_rates,
    pumping_rate,
)

logger = logging.getLogger(__name__)

DEFAULT_PRESET = "desk"

ScenarioName = Literal[
    "battery-charge",
    "battery-stored-vs-eff",
    "battery-detuning-sweep",
    "battery-pump-sweep",
    "engine-short-cycle-sweep",
    "engine-threshold",
    "engine-asymptotic",
]

# Recognized keys per section; params keys come from the parameter models
SECTION_KEYS: dict[str, tuple[str, ...]] = {
    "scenario": ("name", "preset"),
    "params": (*EngineParams.model_fields, "detuning"),
    "sweep": (
        "axis",
        "values",
        "start",
        "stop",
        "num",
        "spacing",
        "series_axis",
        "series",
        "fixed_ratio_tm",
        "charge_time",
        "bracket",
        "resolution",
        "asymptotic",
    ),
    "cycle": (
        "recharge_time",
        "discharge",
        "max_cycles",
        "fp_tol",
        "model",
        "solver",
        "rel_tol",
        "abs_tol",
        "max_step_factor",
    ),
    "output": ("csv", "settle_tol"),
}

LIST_KEYS = {"sweep.values", "sweep.series", "sweep.bracket"}
KEY_ALIASES = {"cycle.discharge": "discharge_mode"}
FIELD_KEYS = {"cycle.discharge_mode": "cycle.discharge"}
GRID_KEYS = ("sweep.values", "sweep.start", "sweep.stop", "sweep.num", "sweep.spacing")

# Axes each scenario can sweep
SCENARIO_AXES: dict[str, tuple[str, ...]] = {
    "battery-charge": ("time",),
    "battery-stored-vs-eff": ("time",),
    "battery-detuning-sweep": ("detuning", "temperature"),
    "battery-pump-sweep": ("pump_fraction", "temperature"),
    "engine-short-cycle-sweep": ("detuning", "temperature"),
    "engine-threshold": ("detuning",),
    "engine-asymptotic": ("temperature", "recharge_time", "detuning"),
}

SERIES_AXES = ("temperature", "detuning", "amplitude", "omega_m", "omega_e")

# Desk preset: hierarchy-preserving rescale of the paper-preset rates
DESK_FACTORS = {
    "params.gamma0_m": 1e2,
    "params.gamma0_i": 1e3,
    "params.gamma0_e": 1e3,
    "params.amplitude": 1e2 * math.sqrt(10.0),
    "params.epsilon": 1e2,
}
DESK_TIME_FACTOR = 1e-3
TIME_AXES = ("time", "recharge_time")


class SweepSpec(BaseModel):
    """Primary grid, optional series axis and scenario-specific sweep knobs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: str
    values: tuple[float, ...] | None = None
    start: float | None = None
    stop: float | None = None
    num: int | None = Field(None, ge=1)
    spacing: Literal["linear", "log"] = "linear"
    series_axis: str | None = None
    series: tuple[float, ...] = ()
    fixed_ratio_tm: float | None = Field(None, gt=0, description="T/omega_m held fixed")
    charge_time: float | None = Field(None, gt=0)
    bracket: tuple[float, float] = (0.0, 1.0)
    resolution: float = Field(1e-3, gt=0)
    asymptotic: bool = True

    @model_validator(mode="after")
    def _check_grid(self):
        grid = self.grid()
        if grid.size == 0:
            raise ValueError("sweep grid is empty")
        if grid.size > 1:
            steps = np.diff(grid)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError("sweep grid must be strictly monotone")
        if self.series_axis is None and self.series:
            raise ValueError("series values given without series_axis")
        if self.series_axis is not None and not self.series:
            raise ValueError(f"series_axis {self.series_axis!r} has no series values")
        if not self.bracket[0] < self.bracket[1]:
            raise ValueError(f"bracket {self.bracket} must be increasing")
        return self

    def grid(self) -> np.ndarray:
        """Grid values of the primary axis."""
        if self.values is not None:
            if any(v is not None for v in (self.start, self.stop, self.num)):
                raise ValueError("give either values or start/stop/num, not both")
            return np.array(self.values, dtype=float)
        if self.start is None or self.stop is None or self.num is None:
            raise ValueError("sweep needs values or start, stop and num")
        if self.spacing == "log":
            if not (self.start > 0 and self.stop > 0):
                raise ValueError("log spacing needs positive start and stop")
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)

    def series_values(self) -> tuple[float | None, ...]:
        return self.series if self.series_axis else (None,)


class CycleSettings(CycleConfig):
    """CycleConfig whose recharge time may be left to the scenario."""

    recharge_time: float | None = Field(None, gt=0)

    def cycle_config(self, recharge_time: float | None = None) -> CycleConfig:
        tau = recharge_time if recharge_time is not None else self.recharge_time
        if tau is None:
            raise ConfigError("cycle.recharge_time is required for this run")
        return CycleConfig(**self.model_dump(exclude={"recharge_time"}), recharge_time=tau)


class OutputSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    csv: str | None = None
    settle_tol: float = Field(SETTLE_TOL, gt=0)


class ScenarioConfig(BaseModel):
    """A validated scenario: parameters, grid, cycle settings and output."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioName
    preset: Literal["paper", "desk"] = DEFAULT_PRESET
    params: BatteryParams
    sweep: SweepSpec
    cycle: CycleSettings = CycleSettings()
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _check_scenario(self):
        axes = SCENARIO_AXES[self.scenario]
        if self.sweep.axis not in axes:
            raise ValueError(
                f"axis {self.sweep.axis!r} is not swept by {self.scenario}; "
                f"expected one of {list(axes)}"
            )
        if self.sweep.series_axis is not None:
            if self.sweep.series_axis not in SERIES_AXES:
                raise ValueError(f"unknown series axis {self.sweep.series_axis!r}")
            if self.sweep.series_axis == self.sweep.axis:
                raise ValueError("series_axis must differ from axis")
        if self.scenario.startswith("engine") and not isinstance(self.params, EngineParams):
            raise ValueError(f"{self.scenario} needs engine parameters")
        if self.sweep.fixed_ratio_tm is not None and (
            self.scenario != "battery-pump-sweep" or self.sweep.axis != "temperature"
        ):
            raise ValueError("fixed_ratio_tm needs battery-pump-sweep over temperature")
        if self.sweep.axis == "pump_fraction":
            grid = self.sweep.grid()
            if np.any(grid <= 0) or np.any(grid > 1):
                raise ValueError("pump_fraction values must lie in (0, 1]")
        if self.sweep.axis in TIME_AXES and np.any(self.sweep.grid() <= 0):
            raise ValueError(f"{self.sweep.axis} values must be positive")
        if self.sweep.axis == "time" and np.any(np.diff(self.sweep.grid()) <= 0):
            raise ValueError("time values must increase")
        return self

    @property
    def csv_name(self) -> str:
        return self.output.csv or f"{self.scenario}.csv"

    def points(self) -> list[dict[str, float]]:
        """Grid points in output order: series outer, primary axis inner."""
        points = []
        for series in self.sweep.series_values():
            for value in self.sweep.grid():
                point = {}
                if series is not None:
                    point[self.sweep.series_axis] = float(series)
                point[self.sweep.axis] = float(value)
                points.append(point)
        return points


def _location(line_num: int, path: Path) -> str:
    return f"{path}:{line_num}"


def parse_config_file(path: Path) -> dict[str, str]:
    """
    Parse a scenario file into a dictionary keyed by "section.key".

    Args:
        path: Path to the scenario file

    Returns:
        Dictionary mapping "section.key" to the raw value text

    Raises:
        FileNotFoundError: If the file doesn't exist
        ConfigError: On malformed lines, unknown sections or keys, duplicates
    """
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")

    entries: dict[str, str] = {}
    section: str | None = None
    with open(path, encoding="utf-8") as f:
        for line_num, line in enumerate(f, 1):
            line = line.strip()

            # Skip empty lines and comments
            if not line or line.startswith(";") or line.startswith("#"):
                continue

            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in SECTION_KEYS:
                    raise ConfigError(
                        f"{_location(line_num, path)}: unknown section [{section}]"
                    )
                continue

            if "=" not in line:
                raise ConfigError(f"{_location(line_num, path)}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            if section is None:
                raise ConfigError(
                    f"{_location(line_num, path)}: key {key!r} outside any section"
                )
            if key not in SECTION_KEYS[section]:
                raise ConfigError(
                    f"{_location(line_num, path)}: unknown key {key!r} in [{section}]"
                )
            full_key = f"{section}.{key}"
            if full_key in entries:
                raise ConfigError(f"{_location(line_num, path)}: duplicate key {full_key}")
            entries[full_key] = value.strip()

    return entries


def write_config(path: Path, entries: dict[str, str], title: str = "scenario file") -> Path:
    """
    Write "section.key" entries grouped into sections.

    Args:
        path: Destination file
        entries: Dictionary of "section.key" values
        title: Text of the header comment
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    groups: dict[str, list[tuple[str, str]]] = {}
    for full_key, value in entries.items():
        section, _, key = full_key.partition(".")
        groups.setdefault(section, []).append((key, value))

    with open(path, "w", encoding="utf-8") as f:
        f.write(f"; qotto {title}\n")
        f.write(f"; Generated by qotto {__version__}\n\n")
        for section, items in groups.items():
            f.write(f"[{section}]\n")
            for key, value in items:
                f.write(f"{key} = {value}\n")
            f.write("\n")
    return path


def _get_battery_charge_template() -> dict[str, str]:
    """Return charging time series at T = 0 and resonance."""
    return {
        "params.omega_m": "1.02",
        "params.gamma0_m": "1e-4",
        "params.gamma0_i": "1e-9",
        "params.amplitude": "1e-6",
        "params.temperature": "0.0",
        "sweep.axis": "time",
        "sweep.start": "1e3",
        "sweep.stop": "4.5e8",
        "sweep.num": "61",
        "sweep.spacing": "log",
    }


def _get_battery_stored_vs_eff_template() -> dict[str, str]:
    """Return stored free energy against efficiency for two temperatures."""
    return {
        **_get_battery_charge_template(),
        "sweep.series_axis": "temperature",
        "sweep.series": "0.0, 0.1",
    }


def _get_battery_detuning_sweep_template() -> dict[str, str]:
    """Return pumping efficiency against detuning for three temperatures."""
    return {
        "params.omega_m": "1.02",
        "params.gamma0_m": "1e-4",
        "params.gamma0_i": "1e-9",
        "params.amplitude": "1e-6",
        "sweep.axis": "detuning",
        "sweep.start": "-0.02",
        "sweep.stop": "0.02",
        "sweep.num": "41",
        "sweep.series_axis": "temperature",
        "sweep.series": "0.01, 0.05, 0.1",
    }


def _get_battery_pump_sweep_template() -> dict[str, str]:
    """Return steady-state population against pump fraction at high temperature."""
    return {
        "params.omega_m": "5.0",
        "params.gamma0_m": "1e-4",
        "params.gamma0_i": "1e-9",
        "params.amplitude": "1e-6",
        "params.temperature": "0.5",
        "sweep.axis": "pump_fraction",
        "sweep.start": "1e-6",
        "sweep.stop": "1.0",
        "sweep.num": "25",
        "sweep.spacing": "log",
    }


def _get_engine_short_cycle_sweep_template() -> dict[str, str]:
    """Return short-cycle efficiency and power against detuning."""
    return {
        "params.omega_e": "0.01",
        "params.omega_m": "1.02",
        "params.gamma0_m": "1e-4",
        "params.gamma0_i": "1e-9",
        "params.gamma0_e": "1e-9",
        "params.amplitude": "1e-6",
        "sweep.axis": "detuning",
        "sweep.start": "-0.02",
        "sweep.stop": "0.02",
        "sweep.num": "41",
        "sweep.series_axis": "temperature",
        "sweep.series": "0.01, 0.05, 0.1",
        "cycle.recharge_time": "1.0",
    }


def _get_engine_threshold_template() -> dict[str, str]:
    """Return shutdown temperatures against detuning."""
    return {
        "params.omega_e": "0.01",
        "params.omega_m": "1.02",
        "params.gamma0_m": "1e-4",
        "params.gamma0_i": "1e-7",
        "params.gamma0_e": "1e-7",
        "params.amplitude": "1e-8",
        "params.epsilon": "2e-4",
        "sweep.axis": "detuning",
        "sweep.start": "-2e-4",
        "sweep.stop": "2e-4",
        "sweep.num": "5",
        "sweep.bracket": "0.0, 0.05",
        "sweep.resolution": "1e-5",
    }


def _get_engine_asymptotic_template() -> dict[str, str]:
    """Return asymptotic-cycle efficiency against temperature for two pump frequencies."""
    return {
        **_get_engine_threshold_template(),
        "sweep.axis": "temperature",
        "sweep.start": "1e-4",
        "sweep.stop": "1.5e-3",
        "sweep.num": "8",
        "sweep.series_axis": "detuning",
        "sweep.series": "0.0, 1e-4",
        "sweep.bracket": None,
        "sweep.resolution": None,
    }


def _get_templates() -> dict[str, dict[str, str]]:
    templates = {
        "battery-charge": _get_battery_charge_template(),
        "battery-stored-vs-eff": _get_battery_stored_vs_eff_template(),
        "battery-detuning-sweep": _get_battery_detuning_sweep_template(),
        "battery-pump-sweep": _get_battery_pump_sweep_template(),
        "engine-short-cycle-sweep": _get_engine_short_cycle_sweep_template(),
        "engine-threshold": _get_engine_threshold_template(),
        "engine-asymptotic": _get_engine_asymptotic_template(),
    }
    return {
        name: {k: v for k, v in template.items() if v is not None}
        for name, template in templates.items()
    }


def _scale_text(value: str, factor: float) -> str:
    return ", ".join(format_value(float(item) * factor) for item in value.split(","))


def desk_rescale(entries: dict[str, str]) -> dict[str, str]:
    """
    Rescale paper-preset entries to the desk preset.

    Rates and amplitudes grow so that p gamma_m^- / gamma_i^- and the rate
    hierarchy are unchanged; times shrink by the gamma_i growth.
    """
    scaled = dict(entries)
    for key, factor in DESK_FACTORS.items():
        if key in scaled:
            scaled[key] = _scale_text(scaled[key], factor)
    time_keys = ["sweep.charge_time", "cycle.recharge_time"]
    if scaled.get("sweep.axis") in TIME_AXES:
        time_keys += ["sweep.start", "sweep.stop", "sweep.values"]
    if scaled.get("sweep.series_axis") in TIME_AXES:
        time_keys.append("sweep.series")
    for key in time_keys:
        if key in scaled:
            scaled[key] = _scale_text(scaled[key], DESK_TIME_FACTOR)
    return scaled


def get_template(scenario: str, preset: str = DEFAULT_PRESET) -> dict[str, str]:
    """
    Preset entries for a scenario.

    Raises:
        ConfigError: For an unknown scenario or preset
    """
    templates = _get_templates()
    if scenario not in templates:
        raise ConfigError(f"Unknown scenario: {scenario}. Available: {SCENARIOS}")
    if preset not in PRESETS:
        raise ConfigError(f"Unknown preset: {preset}. Available: {PRESETS}")
    entries = {"scenario.name": scenario, "scenario.preset": preset}
    template = templates[scenario]
    entries.update(desk_rescale(template) if preset == "desk" else template)
    return entries


def _section_data(entries: dict[str, str], section: str) -> dict[str, Any]:
    data: dict[str, Any] = {}
    for full_key, value in entries.items():
        name, _, key = full_key.partition(".")
        if name != section:
            continue
        if full_key in LIST_KEYS:
            data[key] = [item.strip() for item in value.split(",") if item.strip()]
        elif value.lower() in ("none", ""):
            data[key] = None
        else:
            data[KEY_ALIASES.get(full_key, key)] = value
    return data


def _describe(error: ValidationError, section: str | None = None) -> str:
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"])
        if section:
            loc = f"{section}.{loc}" if loc else section
        lines.append(f"{loc}: {item['msg']}")
    return "; ".join(lines)


def _params(entries: dict[str, str], scenario: str) -> BatteryParams:
    data = _section_data(entries, "params")
    params_cls = EngineParams if scenario.startswith("engine") else BatteryParams
    detuning = data.pop("detuning", None)
    try:
        params = params_cls.model_validate(data)
        if detuning is not None:
            params = params.replace(detuning=float(detuning))
    except ValidationError as e:
        raise ConfigError(f"Invalid parameters: {_describe(e, 'params')}") from e
    except ValueError as e:
        raise ConfigError(f"Invalid parameters: params.detuning: {e}") from e
    return params


def build_config(entries: dict[str, str]) -> ScenarioConfig:
    """
    Validate merged "section.key" entries into a ScenarioConfig.

    Raises:
        ConfigError: With the offending field path
    """
    scenario = entries.get("scenario.name")
    if scenario is None:
        raise ConfigError("scenario.name is required")
    if scenario not in SCENARIOS:
        raise ConfigError(f"Unknown scenario: {scenario}. Available: {SCENARIOS}")
    params = _params(entries, scenario)
    data = {
        "scenario": scenario,
        "preset": entries.get("scenario.preset", DEFAULT_PRESET),
        "params": params,
        "sweep": _section_data(entries, "sweep"),
        "cycle": _section_data(entries, "cycle"),
        "output": _section_data(entries, "output"),
    }
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid scenario: {_describe(e)}") from e


def load_config(path: Path, preset: str | None = None) -> ScenarioConfig:
    """
    Load a scenario file on top of its preset template.

    Args:
        path: Scenario file
        preset: Overrides the file's scenario.preset when given

    Returns:
        Validated configuration with defaults filled in

    Raises:
        FileNotFoundError: If the file doesn't exist
        ConfigError: On unknown keys or invalid values
    """
    entries = parse_config_file(path)
    scenario = entries.get("scenario.name")
    if scenario is None:
        raise ConfigError(f"{path}: [scenario] name is required")
    chosen = preset or entries.get("scenario.preset", DEFAULT_PRESET)
    merged = get_template(scenario, chosen)
    # A file that names its own grid or axis replaces the template grid entirely
    new_axis = entries.get("sweep.axis", merged.get("sweep.axis")) != merged.get("sweep.axis")
    if new_axis or any(key in entries for key in ("sweep.values", "sweep.start", "sweep.stop")):
        for key in GRID_KEYS:
            merged.pop(key, None)
    if "sweep.series_axis" in entries:
        merged.pop("sweep.series", None)
    merged.update(entries)
    merged["scenario.preset"] = chosen
    cfg = build_config(merged)
    logger.info("loaded %s (%s preset) from %s", cfg.scenario, cfg.preset, path)
    return cfg


def config_entries(cfg: ScenarioConfig) -> dict[str, str]:
    """Every resolved setting of cfg as "section.key" text."""
    entries = {"scenario.name": cfg.scenario, "scenario.preset": cfg.preset}
    sections = {
        "params": cfg.params.model_dump(),
        "sweep": cfg.sweep.model_dump(),
        "cycle": cfg.cycle.model_dump(),
        "output": cfg.output.model_dump(),
    }
    for section, data in sections.items():
        for field, value in data.items():
            key = FIELD_KEYS.get(f"{section}.{field}", f"{section}.{field}")
            if value is None:
                continue
            if isinstance(value, (tuple, list)):
                entries[key] = ", ".join(format_value(v) for v in value)
            else:
                entries[key] = format_value(value)
    return entries


def write_resolved_config(cfg: ScenarioConfig, directory: Path) -> Path:
    """Echo the resolved configuration as <scenario>.resolved.conf."""
    path = directory / f"{cfg.scenario}{RESOLVED_SUFFIX}"
    return write_config(path, config_entries(cfg), "resolved configuration")


def write_metadata(cfg: ScenarioConfig, directory: Path, meta: dict[str, Any]) -> Path:
    """Write the run metadata sidecar as <scenario>.meta.conf."""
    path = directory / f"{cfg.scenario}{META_SUFFIX}"
    entries = {f"meta.{key}": format_value(value) for key, value in meta.items()}
    return write_config(path, entries, "run metadata")


def get_config_summary(cfg: ScenarioConfig) -> dict[str, Any]:
    """
    Human-readable summary of a resolved configuration.

    Args:
        cfg: Validated scenario configuration

    Returns:
        Dictionary with scenario, preset, grid and validity information
    """
    params = cfg.params
    grid = cfg.sweep.grid()
    gm_minus = natural_rates(params.gamma0_m, params.omega_m - params.omega_i, params.temperature)[1]
    gi_minus = natural_rates(params.gamma0_i, params.omega_i, params.temperature)[1]
    p = pumping_rate(params.amplitude, gm_minus, params.detuning) if gm_minus > 0 else math.nan

    summary: dict[str, Any] = {
        "scenario": cfg.scenario,
        "preset": cfg.preset,
        "axis": cfg.sweep.axis,
        "grid": {
            "size": int(grid.size),
            "first": float(grid[0]),
            "last": float(grid[-1]),
        },
        "series": {
            "axis": cfg.sweep.series_axis,
            "values": list(cfg.sweep.series),
        },
        "points": len(cfg.points()),
        "pump_rate": p,
        "pump_ratio": p * gm_minus / gi_minus if gi_minus > 0 else math.nan,
        "validity": adiabatic_validity(params),
        "csv": cfg.csv_name,
    }
    return summary
