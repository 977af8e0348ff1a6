"""
Scenario registry and runner.

Each scenario maps one work point of a ScenarioConfig to CSV rows. The runner
fans the points out over worker processes, reassembles the rows in grid order
and writes the CSV, the resolved configuration and the metadata sidecar.
"""

import functools
import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .common import Point, Row, run_sweep, write_csv
from .config import ensure_output_dir
from .engine import (
    analytic_shutdown_temperature,
    exact_low_temperature_efficiency,
    find_oss,
    otto_limit_efficiency,
    short_cycle_nominal,
    short_cycle_report,
    shutdown_temperature,
)
from .errors import ConfigError, SweepError
from .lindblad import NESS_RTOL, NESS_STATE_TOL, Propagator, evolve, find_ness
from .models import (
    VALIDITY_WARN,
    BatteryParams,
    EngineParams,
    adiabatic_validity,
    build_battery3,
    build_effective2,
    model_gibbs_state,
    natural_rates,
    pumping_rate,
    rabi_flip_population,
)
from .scenario_config import ScenarioConfig, write_metadata, write_resolved_config
from .thermo import ThermoLedger, charging_report

logger = logging.getLogger(__name__)

PARAM_AXES = ("temperature", "detuning", "amplitude", "omega_m", "omega_e")
ASYMPTOTIC_SPAN = 10.0

Worker = Callable[[ScenarioConfig, Point], list[Row]]
Finalizer = Callable[[ScenarioConfig, list[Row]], list[Row]]


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    worker: Worker
    finalize: Finalizer | None = None


def point_params(cfg: ScenarioConfig, point: Point) -> BatteryParams:
    """Parameters of one grid point: the config's params with the point's axes applied."""
    params = cfg.params
    changes = {key: value for key, value in point.items() if key in PARAM_AXES}
    if "pump_fraction" in point:
        changes["amplitude"] = params.amplitude * math.sqrt(point["pump_fraction"])
    if cfg.sweep.fixed_ratio_tm is not None and "temperature" in changes:
        changes["omega_m"] = changes["temperature"] / cfg.sweep.fixed_ratio_tm
        changes.setdefault("detuning", params.detuning)
    if not changes:
        return params
    return params.replace(**changes)


def work_points(cfg: ScenarioConfig) -> list[Point]:
    """Units of work: one per series value for time series, one per grid point otherwise."""
    if cfg.sweep.axis == "time":
        return [
            {cfg.sweep.series_axis: float(value)} if value is not None else {}
            for value in cfg.sweep.series_values()
        ]
    return cfg.points()


def _pump_rate(params: BatteryParams) -> float:
    gm_minus = natural_rates(
        params.gamma0_m, params.omega_m - params.omega_i, params.temperature
    )[1]
    return pumping_rate(params.amplitude, gm_minus, params.detuning)


def _charge_rows(cfg: ScenarioConfig, point: Point, effective: bool) -> list[Row]:
    params = point_params(cfg, point)
    ctrl = cfg.cycle.step_control()
    model = build_battery3(params)
    ledger = ThermoLedger(model)
    full = Propagator(model, model_gibbs_state(model), ctrl, (ledger,))
    reduced = None
    if effective:
        qubit = build_effective2(params)
        reduced = Propagator(qubit.model, model_gibbs_state(qubit.model), ctrl)

    samples = []
    for t in cfg.sweep.grid():
        full.advance(float(t))
        sample = {"index": len(ledger) - 1, "state": full.state()}
        if reduced is not None:
            reduced.advance(float(t))
            sample["rho_ii_eff"] = reduced.state().population("i")
        samples.append(sample)

    trajectory = full.trajectory()
    rows = []
    for t, sample in zip(cfg.sweep.grid(), samples):
        report = charging_report(trajectory, ledger, params.temperature, sample["index"])
        state = sample["state"]
        row: Row = {**point, "time": float(t), **report.as_row()}
        row["rho_gg"] = state.population("g")
        row["rho_ii"] = state.population("i")
        row["rho_mm"] = state.population("m")
        if reduced is not None:
            row["rho_ii_eff"] = sample["rho_ii_eff"]
        rows.append(row)
    return rows


def battery_charge(cfg: ScenarioConfig, point: Point) -> list[Row]:
    return _charge_rows(cfg, point, effective=True)


def battery_stored_vs_eff(cfg: ScenarioConfig, point: Point) -> list[Row]:
    return _charge_rows(cfg, point, effective=False)


def _charging_point(cfg: ScenarioConfig, params: BatteryParams) -> Row:
    """Charging report at charge_time, or at the NESS convergence time."""
    model = build_battery3(params)
    ledger = ThermoLedger(model)
    ctrl = cfg.cycle.step_control()
    rho0 = model_gibbs_state(model)
    charge_time = cfg.sweep.charge_time
    if charge_time is not None:
        trajectory = evolve(model, rho0, charge_time, ctrl, (ledger,))
        report = charging_report(trajectory, ledger, params.temperature)
        return {**report.as_row(), "p_i": trajectory.final_state().population("i")}

    ness = find_ness(model, rho0, ctrl=ctrl, observers=(ledger,), settle_tol=cfg.output.settle_tol)
    index = ness.trajectory.index_at(ness.tau)
    report = charging_report(ness.trajectory, ledger, params.temperature, index)
    return {**report.as_row(), "p_i": ness.state.population("i"), "ness_time": ness.tau}


def battery_detuning_sweep(cfg: ScenarioConfig, point: Point) -> list[Row]:
    params = point_params(cfg, point)
    row = {**point, **_charging_point(cfg, params)}
    row["pump_rate"] = _pump_rate(params)
    row["p_pump_norm"] = math.nan
    return [row]


def _normalize(
    rows: list[Row], cfg: ScenarioConfig, column: str, target: str, reference: str
) -> list[Row]:
    """Divide `column` by a per-series reference value into `target`."""
    series_axis = cfg.sweep.series_axis
    groups: dict[float | None, list[Row]] = {}
    for row in rows:
        groups.setdefault(row.get(series_axis) if series_axis else None, []).append(row)
    for group in groups.values():
        values = np.array([row[column] for row in group], dtype=float)
        if reference == "zero":
            axis = np.array([row[cfg.sweep.axis] for row in group], dtype=float)
            base = values[int(np.argmin(np.abs(axis)))]
        else:
            finite = values[np.isfinite(values)]
            base = float(finite.max()) if finite.size else math.nan
        for row, value in zip(group, values):
            row[target] = value / base if base and math.isfinite(base) else math.nan
    return rows


def _finalize_detuning(cfg: ScenarioConfig, rows: list[Row]) -> list[Row]:
    if cfg.sweep.axis != "detuning":
        return rows
    return _normalize(rows, cfg, "p_pump", "p_pump_norm", reference="zero")


def battery_pump_sweep(cfg: ScenarioConfig, point: Point) -> list[Row]:
    params = point_params(cfg, point)
    model = build_battery3(params)
    ledger = ThermoLedger(model)
    ness = find_ness(
        model,
        model_gibbs_state(model),
        ctrl=cfg.cycle.step_control(),
        observers=(ledger,),
        settle_tol=cfg.output.settle_tol,
    )
    charge_time = cfg.sweep.charge_time
    index = ness.trajectory.index_at(charge_time if charge_time is not None else ness.tau)
    report = charging_report(ness.trajectory, ledger, params.temperature, index)
    p_ness = ness.state.population("i")
    p_rabi = rabi_flip_population(params)
    row: Row = {**point}
    if cfg.sweep.fixed_ratio_tm is not None:
        row["omega_m"] = params.omega_m
    row.update(
        amplitude=params.amplitude,
        pump_rate=_pump_rate(params),
        p_i_ness=p_ness,
        p_i_rabi=p_rabi,
        exceeds_rabi=p_ness > p_rabi,
        eta_pump=report.eta_pump,
        delta_f=report.delta_f,
        e_in=report.e_in,
        ness_time=ness.tau,
    )
    return [row]


def _engine_params(cfg: ScenarioConfig, point: Point) -> EngineParams:
    params = point_params(cfg, point)
    if not isinstance(params, EngineParams):
        raise ConfigError(f"{cfg.scenario} needs engine parameters")
    return params


def engine_short_cycle_sweep(cfg: ScenarioConfig, point: Point) -> list[Row]:
    params = _engine_params(cfg, point)
    tau = cfg.cycle.recharge_time
    report = short_cycle_report(params, tau) if tau is not None else short_cycle_nominal(params)
    row: Row = {**point, **report.as_row()}
    row["eta_low_t"] = exact_low_temperature_efficiency(params)
    row["eta_otto_limit"] = otto_limit_efficiency(params)
    row["power_norm"] = math.nan
    return [row]


def _finalize_short_cycle(cfg: ScenarioConfig, rows: list[Row]) -> list[Row]:
    return _normalize(rows, cfg, "power", "power_norm", reference="max")


def engine_threshold(cfg: ScenarioConfig, point: Point) -> list[Row]:
    params = _engine_params(cfg, point)
    sweep = cfg.sweep
    row: Row = {**point}
    row["t_short_cycle"] = shutdown_temperature(
        params, mode="short_cycle", bracket=sweep.bracket, resolution=sweep.resolution
    )
    row["t_analytic"] = analytic_shutdown_temperature(params, bracket=sweep.bracket)
    row["t_asymptotic"] = math.nan
    if sweep.asymptotic:
        base = cfg.cycle.cycle_config(cfg.cycle.recharge_time or 1.0)
        row["t_asymptotic"] = shutdown_temperature(
            params,
            base,
            mode="asymptotic",
            bracket=sweep.bracket,
            resolution=sweep.resolution,
        )
    return [row]


def engine_asymptotic(cfg: ScenarioConfig, point: Point) -> list[Row]:
    params = _engine_params(cfg, point)
    tau_r = point.get("recharge_time", cfg.cycle.recharge_time)
    if tau_r is None:
        gi_minus = natural_rates(params.gamma0_i, params.omega_i, params.temperature)[1]
        tau_r = ASYMPTOTIC_SPAN / gi_minus
    _, report = find_oss(cfg.cycle.cycle_config(tau_r), params)
    short = short_cycle_nominal(params)
    row: Row = {**point, "recharge_time": tau_r, **report.as_row()}
    row["eta_sc"] = short.eta
    row["power_sc"] = short.power
    return [row]


SCENARIO_REGISTRY: dict[str, Scenario] = {
    scenario.name: scenario
    for scenario in (
        Scenario(
            "battery-charge",
            "Charging time series: efficiency, populations, free energy, work and heat",
            battery_charge,
        ),
        Scenario(
            "battery-stored-vs-eff",
            "Stored free energy against pumping efficiency along the charge",
            battery_stored_vs_eff,
        ),
        Scenario(
            "battery-detuning-sweep",
            "Pumping efficiency and normalized input power against detuning",
            battery_detuning_sweep,
            _finalize_detuning,
        ),
        Scenario(
            "battery-pump-sweep",
            "Steady-state population against pump strength, with the Rabi-flip cap",
            battery_pump_sweep,
        ),
        Scenario(
            "engine-short-cycle-sweep",
            "Short-cycle efficiency and normalized power against detuning",
            engine_short_cycle_sweep,
            _finalize_short_cycle,
        ),
        Scenario(
            "engine-threshold",
            "Shutdown temperatures: short-cycle, analytic and asymptotic-cycle",
            engine_threshold,
        ),
        Scenario(
            "engine-asymptotic",
            "Operational-steady-state cycles against temperature or recharge time",
            engine_asymptotic,
        ),
    )
}


def run_scenario(cfg: ScenarioConfig, out_dir: Path | None = None, jobs: int = 1) -> Path:
    """
    Run a scenario and write its CSV, resolved configuration and metadata.

    Args:
        cfg: Validated configuration
        out_dir: Output directory, defaults to QOTTO_OUTPUT_DIR
        jobs: Worker processes

    Returns:
        Path of the CSV file

    Raises:
        SweepError: If a point fails; rows of the earlier points are written first
    """
    scenario = SCENARIO_REGISTRY[cfg.scenario]
    directory = ensure_output_dir(out_dir)
    write_resolved_config(cfg, directory)
    csv_path = directory / cfg.csv_name

    validity = adiabatic_validity(cfg.params)
    if validity > VALIDITY_WARN:
        logger.warning(
            "%s: adiabatic validity metric %.3g exceeds %g", cfg.scenario, validity, VALIDITY_WARN
        )

    points = work_points(cfg)
    logger.info("%s: %d work points on %d job(s)", cfg.scenario, len(points), jobs)
    started = time.perf_counter()
    meta = {
        "scenario": cfg.scenario,
        "preset": cfg.preset,
        "version": __version__,
        "points": len(points),
        "validity": validity,
        "rel_tol": cfg.cycle.rel_tol,
        "abs_tol": cfg.cycle.abs_tol,
        "max_step_factor": cfg.cycle.max_step_factor,
        "ness_rtol": NESS_RTOL,
        "ness_state_tol": NESS_STATE_TOL,
        "settle_tol": cfg.output.settle_tol,
    }

    rows: list[Row] = []
    worker = functools.partial(scenario.worker, cfg)
    try:
        for _, point_rows in run_sweep(worker, points, jobs):
            rows.extend(point_rows)
    except SweepError as e:
        write_csv(csv_path, rows)
        meta.update(status="failed", rows=len(rows), failed_point=str(e.point))
        meta["wall_time"] = time.perf_counter() - started
        write_metadata(cfg, directory, meta)
        raise

    if scenario.finalize is not None:
        rows = scenario.finalize(cfg, rows)
    write_csv(csv_path, rows)
    meta.update(status="ok", rows=len(rows))
    meta["wall_time"] = time.perf_counter() - started
    write_metadata(cfg, directory, meta)
    logger.info("%s: finished in %.1f s", cfg.scenario, meta["wall_time"])
    return csv_path
