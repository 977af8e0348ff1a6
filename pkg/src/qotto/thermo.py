"""
Thermodynamic bookkeeping for master-equation runs.

Work and heat rates are linear functionals of the rotating-frame state. The
ledger integrates them with the stepper's own stage weights, so the first law
holds to roundoff on every trajectory.
"""

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import BookkeepingError, ModelError
from .lindblad import (
    DriveSpec,
    ModelSpec,
    StepRecord,
    Trajectory,
    dissipator_superoperator,
    energy_operator,
    frame_energies,
)
from .models import BatteryParams, natural_rates, pumping_rate
from .qcore import (
    as_array,
    clamped_spectrum,
    entropy_from_spectrum,
    expectation,
    hermitian_spectrum,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

WORK_IN = "pump"
WORK_EXT = "extract"
GROUP_ORDER = ("gamma_m", "gamma_i", "gamma_e")

FIRST_LAW_RTOL = 1e-6
FIRST_LAW_ATOL = 1e-12
BOOKKEEPING_ATOL = 1e-12


def _trace_row(matrix: np.ndarray) -> np.ndarray:
    """Row f with f @ vec(rho) = Tr(matrix rho) for row-major vec."""
    return np.ascontiguousarray(np.asarray(matrix, dtype=complex).T).reshape(-1)


def _work_row(drive: DriveSpec, model: ModelSpec) -> np.ndarray:
    d = model.dim
    lower, upper = (model.index(label) for label in drive.transition)
    row = np.zeros(d * d, dtype=complex)
    factor = 1j * drive.amplitude * drive.frequency
    row[upper * d + lower] += factor
    row[lower * d + upper] -= factor
    return row


def _rotating_state(rho, model: ModelSpec, t: float) -> np.ndarray:
    state = as_array(rho)
    if model.frame == "lab":
        energies = frame_energies(model)
        state = state * np.exp(1j * np.subtract.outer(energies, energies) * t)
    return state


def work_rate(rho, model: ModelSpec, t: float = 0.0, drive: str | None = None) -> float:
    """
    Alicki work rate i A w (rho_ul - rho_lu) summed over drives.

    Args:
        rho: State, rotating frame unless model.frame == "lab"
        model: Model the state belongs to
        t: Time, used to move a lab-frame state into the rotating frame
        drive: Restrict to one drive by name

    Returns:
        dW/dt (positive when work is done on the system)
    """
    vec = _rotating_state(rho, model, t).reshape(-1)
    total = 0j
    for spec in model.drives:
        if drive is None or spec.name == drive:
            total += _work_row(spec, model) @ vec
    return float(np.real(total))


def _group_heat_rows(model: ModelSpec) -> tuple[dict[str, np.ndarray], np.ndarray]:
    energy = _trace_row(energy_operator(model))
    heat: dict[str, np.ndarray] = {}
    channel_work = np.zeros(model.dim**2, dtype=complex)
    for channel in model.channels:
        row = energy @ dissipator_superoperator(channel)
        heat.setdefault(channel.group, np.zeros_like(row))
        heat[channel.group] += (1.0 - channel.work_fraction) * row
        channel_work += channel.work_fraction * row
    return heat, channel_work


def channel_heat_rate(rho, group: str, model: ModelSpec, t: float = 0.0) -> float:
    """
    Heat rate Tr(L_k[rho] H) of one channel group.

    H is the frame-consistent Hamiltonian H_0 + V. Channels carrying a
    work_fraction contribute only the remaining share.

    Raises:
        ModelError: If the model has no channel in the group
    """
    if group not in model.channel_groups():
        raise ModelError(f"Unknown channel group {group!r}; model has {model.channel_groups()}")
    heat, _ = _group_heat_rows(model)
    vec = _rotating_state(rho, model, t).reshape(-1)
    return float(np.real(heat[group] @ vec))


@dataclass(frozen=True)
class LedgerTotals:
    """Accumulated work, heat and energy change of one or more segments."""

    work: Mapping[str, float] = field(default_factory=dict)
    heat: Mapping[str, float] = field(default_factory=dict)
    delta_u: float = 0.0
    duration: float = 0.0
    population_integrals: Mapping[str, float] = field(default_factory=dict)

    @staticmethod
    def _add(left: Mapping[str, float], right: Mapping[str, float]) -> dict[str, float]:
        merged = dict(left)
        for key, value in right.items():
            merged[key] = merged.get(key, 0.0) + value
        return merged

    def merge(self, other: "LedgerTotals") -> "LedgerTotals":
        return LedgerTotals(
            work=self._add(self.work, other.work),
            heat=self._add(self.heat, other.heat),
            delta_u=self.delta_u + other.delta_u,
            duration=self.duration + other.duration,
            population_integrals=self._add(
                self.population_integrals, other.population_integrals
            ),
        )

    __add__ = merge

    @property
    def w_in(self) -> float:
        return self.work.get(WORK_IN, 0.0)

    @property
    def w_ext(self) -> float:
        return self.work.get(WORK_EXT, 0.0)

    @property
    def w_total(self) -> float:
        return float(sum(self.work.values()))

    @property
    def q_total(self) -> float:
        return float(sum(self.heat.values()))

    def heat_of(self, group: str) -> float:
        return self.heat.get(group, 0.0)

    @property
    def first_law_residual(self) -> float:
        return self.delta_u - self.w_total - self.q_total

    def first_law_scale(self, atol: float = FIRST_LAW_ATOL) -> float:
        terms = [abs(v) for v in self.work.values()] + [abs(v) for v in self.heat.values()]
        return max([abs(self.delta_u), atol, *terms])


class ThermoLedger:
    """
    Observer accumulating U, S, F, ergotropy, work and per-group heat.

    One sample is kept per accepted step. Work, heat and population integrals
    are cumulative from the first sample.
    """

    def __init__(self, model: ModelSpec, temperature: float | None = None):
        self.model = model
        self.temperature = (
            model.bath_temperature if temperature is None else temperature
        )
        d = model.dim
        self._energy_row = _trace_row(energy_operator(model))
        self._bare_row = _trace_row(np.diag(model.level_energies))
        self._bare_sorted = np.sort(np.array(model.level_energies))

        heat, channel_work = _group_heat_rows(model)
        keys: list[tuple[str, str]] = []
        rows: list[np.ndarray] = []
        work_rows: dict[str, np.ndarray] = {
            drive.name: _work_row(drive, model) for drive in model.drives
        }
        if any(channel.work_fraction for channel in model.channels):
            work_rows[WORK_IN] = work_rows.get(WORK_IN, 0) + channel_work
        for name, row in work_rows.items():
            keys.append(("work", name))
            rows.append(row)
        for group, row in heat.items():
            keys.append(("heat", group))
            rows.append(row)
        for k, label in enumerate(model.labels):
            row = np.zeros(d * d, dtype=complex)
            row[k * d + k] = 1.0
            keys.append(("population", label))
            rows.append(row)
        self._keys = keys
        self._rows = np.array(rows)
        self._cumulative = np.zeros(len(keys))

        self.times: list[float] = []
        self.internal_energy: list[float] = []
        self.entropy: list[float] = []
        self.free_energy: list[float] = []
        self.ergotropy: list[float] = []
        self._history: list[np.ndarray] = []

    def _sample(self, t: float, state: np.ndarray, eigenvalues: np.ndarray) -> None:
        spectrum = np.clip(eigenvalues, 0.0, None)
        u = float(np.real(self._energy_row @ state))
        s = entropy_from_spectrum(spectrum)
        bare = float(np.real(self._bare_row @ state))
        passive = float(np.sort(spectrum)[::-1] @ self._bare_sorted)
        self.times.append(t)
        self.internal_energy.append(u)
        self.entropy.append(s)
        self.free_energy.append(u - self.temperature * s)
        self.ergotropy.append(max(bare - passive, 0.0))
        self._history.append(self._cumulative.copy())

    def start(self, t: float, state: np.ndarray, eigenvalues: np.ndarray) -> None:
        if self.times:
            raise ModelError("ThermoLedger is already attached to a run")
        self._sample(t, state, eigenvalues)

    def observe(self, record: StepRecord) -> None:
        self._cumulative = self._cumulative + record.h * np.real(
            self._rows @ record.quadrature_state
        )
        self._sample(record.t_next, record.new_state, record.eigenvalues)

    def __len__(self) -> int:
        return len(self.times)

    def _resolve(self, index: int) -> int:
        if not self.times:
            raise ModelError("ThermoLedger holds no samples")
        return range(len(self.times))[index]

    def history(self, kind: str, name: str) -> np.ndarray:
        """Cumulative work/heat/population integral at every sample."""
        try:
            column = self._keys.index((kind, name))
        except ValueError:
            return np.zeros(len(self.times))
        return np.array([h[column] for h in self._history])

    def totals(self, index: int = -1) -> LedgerTotals:
        """Totals from the first sample up to sample `index`."""
        k = self._resolve(index)
        buckets: dict[str, dict[str, float]] = {"work": {}, "heat": {}, "population": {}}
        for (kind, name), value in zip(self._keys, self._history[k]):
            buckets[kind][name] = float(value)
        return LedgerTotals(
            work=buckets["work"],
            heat=buckets["heat"],
            delta_u=self.internal_energy[k] - self.internal_energy[0],
            duration=self.times[k] - self.times[0],
            population_integrals=buckets["population"],
        )

    def first_law_residual(self, index: int = -1) -> float:
        return self.totals(index).first_law_residual


def injected_energy_branches(w_in: float, heats: Mapping[str, float]) -> dict[str, float]:
    """
    Every candidate of the injected-energy max rule.

    Candidates are W_in alone, W_in plus each group's heat and W_in plus the
    total heat, in that order.
    """
    branches = {"W_in": w_in}
    for group, q in heats.items():
        branches[f"W_in+Q_{group}"] = w_in + q
    branches["W_in+Q"] = w_in + sum(heats.values())
    return branches


def select_injected_energy(branches: Mapping[str, float]) -> tuple[str, float]:
    """Winning branch; ties go to the earlier candidate."""
    name = max(branches, key=lambda key: branches[key])
    return name, branches[name]


def injected_energy(
    w_in: float,
    q_gamma_m: float,
    q_gamma_i: float,
    q_gamma_e: float | None = None,
) -> float:
    """E_in as the max over the battery branches, or the engine branches with q_gamma_e."""
    heats = {"gamma_m": q_gamma_m, "gamma_i": q_gamma_i}
    if q_gamma_e is not None:
        heats["gamma_e"] = q_gamma_e
    return select_injected_energy(injected_energy_branches(w_in, heats))[1]


def free_energy(rho, h0, temperature: float) -> float:
    """F = Tr(rho H_0) - T S(rho)."""
    if temperature < 0:
        raise ModelError(f"Temperature must be non-negative, got {temperature}")
    u = float(np.real(expectation(rho, h0)))
    if temperature == 0.0:
        return u
    return u - temperature * von_neumann_entropy(rho)


def ergotropy(rho, h0) -> float:
    """Tr(rho H_0) minus the energy of the passive state with the same spectrum."""
    populations = np.sort(clamped_spectrum(rho))[::-1]
    energies, _ = hermitian_spectrum(h0)
    u = float(np.real(expectation(rho, h0)))
    return max(u - float(populations @ energies), 0.0)


@dataclass(frozen=True)
class ChargingReport:
    delta_f: float
    e_in: float
    e_in_branch: str
    w_in: float
    q_gamma_m: float
    q_gamma_i: float
    eta_pump: float
    p_pump: float
    tau: float

    def as_row(self) -> dict[str, float | str]:
        return {
            "delta_f": self.delta_f,
            "e_in": self.e_in,
            "e_in_branch": self.e_in_branch,
            "w_in": self.w_in,
            "q_gamma_m": self.q_gamma_m,
            "q_gamma_i": self.q_gamma_i,
            "eta_pump": self.eta_pump,
            "p_pump": self.p_pump,
            "tau": self.tau,
        }


def charging_report(
    trajectory: Trajectory,
    ledger: ThermoLedger,
    temperature: float,
    index: int = -1,
) -> ChargingReport:
    """
    Charging figures of merit from the start of the run to sample `index`.

    eta_pump is NaN when no energy was injected.

    Raises:
        BookkeepingError: If free energy grew while E_in <= 0
    """
    if len(trajectory) != len(ledger):
        raise ModelError(
            f"Ledger has {len(ledger)} samples, trajectory has {len(trajectory)}"
        )
    k = ledger._resolve(index)
    totals = ledger.totals(k)
    u = ledger.internal_energy
    s = ledger.entropy
    delta_f = (u[k] - temperature * s[k]) - (u[0] - temperature * s[0])
    tau = float(trajectory.times[k] - trajectory.times[0])

    q_m = totals.heat_of("gamma_m")
    q_i = totals.heat_of("gamma_i")
    branch, e_in = select_injected_energy(
        injected_energy_branches(totals.w_in, {"gamma_m": q_m, "gamma_i": q_i})
    )
    if e_in <= 0.0 and delta_f > BOOKKEEPING_ATOL:
        raise BookkeepingError(
            f"Free energy grew by {delta_f:.3e} with injected energy {e_in:.3e}"
        )
    eta = delta_f / e_in if e_in > 0.0 else math.nan
    if eta > 1.0 + FIRST_LAW_RTOL:
        logger.warning("eta_pump = %.8f exceeds 1 at t=%g", eta, tau)
    return ChargingReport(
        delta_f=delta_f,
        e_in=e_in,
        e_in_branch=branch,
        w_in=totals.w_in,
        q_gamma_m=q_m,
        q_gamma_i=q_i,
        eta_pump=eta,
        p_pump=delta_f / tau if tau > 0.0 else math.nan,
        tau=tau,
    )


def adiabatic_closed_forms(
    params: BatteryParams,
    gg_integral: float,
    ii_integral: float,
    tau: float,
) -> tuple[float, float, float]:
    """
    Work and heats of a charging run with |m> eliminated.

    Args:
        params: Battery parameters
        gg_integral: Integral of rho_gg over the run
        ii_integral: Integral of rho_ii over the run
        tau: Run duration; the integrals cannot exceed it

    Returns:
        (W_in, Q_gamma_m, Q_gamma_i)
    """
    for name, value in (("gg_integral", gg_integral), ("ii_integral", ii_integral)):
        if value < 0.0 or value > tau * (1.0 + 1e-9):
            raise ModelError(f"{name}={value:g} is not a population integral over tau={tau:g}")
    t = params.temperature
    gm_minus = natural_rates(params.gamma0_m, params.omega_m - params.omega_i, t)[1]
    gi_plus, gi_minus = natural_rates(params.gamma0_i, params.omega_i, t)
    pumped = pumping_rate(params.amplitude, gm_minus, params.detuning) * gm_minus
    p = pumped / gm_minus
    w_in = pumped * params.omega_f * gg_integral
    q_m = pumped * (params.omega_i - params.omega_f) * gg_integral
    q_i = -p * gi_plus * params.detuning * gg_integral + params.omega_i * (
        gi_plus * gg_integral - gi_minus * ii_integral
    )
    return w_in, q_m, q_i
