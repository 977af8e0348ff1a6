"""qotto - optically pumped qutrit battery and two-stroke engine."""

__version__ = "1.0.0"

from .engine import CycleConfig, CycleReport, ShortCycleReport, find_oss, run_cycle
from .errors import (
    ConfigError,
    ConvergenceError,
    ModelError,
    NumericError,
    QottoError,
    SweepError,
)
from .lindblad import ModelSpec, evolve, find_ness
from .models import BatteryParams, EngineParams, build_battery3, build_engine4
from .qcore import DensityMatrix
from .thermo import ThermoLedger, charging_report

__all__ = [
    "BatteryParams",
    "EngineParams",
    "build_battery3",
    "build_engine4",
    "ModelSpec",
    "DensityMatrix",
    "evolve",
    "find_ness",
    "ThermoLedger",
    "charging_report",
    "CycleConfig",
    "CycleReport",
    "ShortCycleReport",
    "run_cycle",
    "find_oss",
    "QottoError",
    "ConfigError",
    "ModelError",
    "NumericError",
    "ConvergenceError",
    "SweepError",
]
