"""
Two-stroke engine: recharge under the pump, discharge by swapping |e> and |i>.

The cycle map acts on the post-discharge state. Operational steady states
(OSS) are its fixed points, found by plain iteration or by an affine solve
that exploits the linearity of the map.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from .errors import ConvergenceError, ModelError, PositivityError
from .lindblad import ModelSpec, StepControl, energy_operator, evolve, slowest_rate
from .models import (
    EngineParams,
    build_effective_engine3,
    build_engine4,
    discharge_duration,
    model_gibbs_state,
    natural_rates,
    pumping_rate,
)
from .qcore import DensityMatrix, as_array, transition
from .thermo import (
    GROUP_ORDER,
    WORK_EXT,
    LedgerTotals,
    ThermoLedger,
    ergotropy,
    injected_energy_branches,
    select_injected_energy,
)

logger = logging.getLogger(__name__)

LEAKAGE_WARN = 1e-6
SHORT_CYCLE_WARN = 0.1
PULSE_RATIO_WARN = 0.1
PERTURB_SCALE = 0.1
NEWTON_STEPS = 3
SHORT_CYCLE_SPAN = 1e-3


class CycleConfig(BaseModel):
    """Stroke durations, discharge mode and fixed-point controls of one engine run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    recharge_time: float = Field(gt=0, description="Recharge stroke duration tau_r")
    discharge_mode: Literal["ideal_swap", "finite_pulse"] = "ideal_swap"
    max_cycles: int = Field(2000, ge=1)
    fp_tol: float = Field(1e-9, gt=0)
    model: Literal["full", "effective"] = "full"
    solver: Literal["iterate", "affine", "auto"] = "auto"
    rel_tol: float = Field(1e-10, gt=0)
    abs_tol: float = Field(1e-13, gt=0)
    max_step_factor: float = Field(2.0, gt=0)

    def step_control(self) -> StepControl:
        return StepControl(
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_step_factor=self.max_step_factor,
        )


@dataclass(frozen=True)
class CycleReport:
    w_in: float
    w_ext: float
    q_gamma_m: float
    q_gamma_i: float
    q_gamma_e: float
    e_in: float
    e_in_branch: str
    eta: float
    power: float
    delta_u_cycle: float
    ergotropy_at_swap: float
    machine_off: bool
    duration: float
    leakage: float
    cycles: int
    first_law_residual: float

    def as_row(self) -> dict[str, float | str | bool | int]:
        return asdict(self)


@dataclass(frozen=True)
class ShortCycleReport:
    r_g: float
    r_e: float
    r_i: float
    r_m: float
    kappa: float
    w_in: float
    q_gamma_e: float
    q_gamma_i: float
    q_gamma_m: float
    e_in: float
    e_in_branch: str
    ergotropy: float
    eta: float
    power: float
    tau: float
    machine_off: bool

    def as_row(self) -> dict[str, float | str | bool]:
        return asdict(self)


@dataclass
class _CycleOutcome:
    charged: DensityMatrix
    end: DensityMatrix
    totals: LedgerTotals
    duration: float
    level_energies: tuple[float, ...]


def discharge_ideal(rho: DensityMatrix) -> DensityMatrix:
    """Exact swap U rho U^H with U = -i(sigma_ie + sigma_ei) + identity elsewhere."""
    labels = rho.labels
    if "e" not in labels or "i" not in labels:
        raise ModelError(f"Swap needs levels e and i, basis is {labels}")
    unitary = np.eye(rho.dim, dtype=complex)
    e, i = rho.index("e"), rho.index("i")
    unitary[e, e] = unitary[i, i] = 0.0
    unitary += -1j * (
        as_array(transition("i", "e", labels)) + as_array(transition("e", "i", labels))
    )
    data = unitary @ rho.data @ unitary.conj().T
    return DensityMatrix(0.5 * (data + data.conj().T), labels)


def _stage_model(params: EngineParams, stage: str, kind: str) -> ModelSpec:
    if kind == "effective":
        return build_effective_engine3(params, stage).model
    return build_engine4(params, stage)


def _energy_change(model: ModelSpec, before: DensityMatrix, after: DensityMatrix) -> float:
    energy = energy_operator(model)
    return float(np.real(np.trace(energy @ (after.data - before.data))))


def _recharge(
    model: ModelSpec, rho: DensityMatrix, tau: float, ctrl: StepControl
) -> tuple[DensityMatrix, LedgerTotals]:
    ledger = ThermoLedger(model)
    trajectory = evolve(model, rho, tau, ctrl, [ledger])
    return trajectory.final_state(), ledger.totals()


def _swap_stage(model: ModelSpec, rho: DensityMatrix) -> tuple[DensityMatrix, LedgerTotals]:
    swapped = discharge_ideal(rho)
    delta = _energy_change(model, rho, swapped)
    return swapped, LedgerTotals(work={WORK_EXT: delta}, delta_u=delta)


def _pulse_stage(
    recharge_model: ModelSpec,
    discharge_model: ModelSpec,
    rho: DensityMatrix,
    tau_d: float,
    ctrl: StepControl,
) -> tuple[DensityMatrix, LedgerTotals]:
    h_recharge = energy_operator(recharge_model)
    h_discharge = energy_operator(discharge_model)
    switch_on = float(np.real(np.trace(rho.data @ (h_discharge - h_recharge))))
    ledger = ThermoLedger(discharge_model)
    final = evolve(discharge_model, rho, tau_d, ctrl, [ledger]).final_state()
    switch_off = float(np.real(np.trace(final.data @ (h_recharge - h_discharge))))
    switching = switch_on + switch_off
    totals = LedgerTotals(work={WORK_EXT: switching}, delta_u=switching)
    return final, totals + ledger.totals()


def discharge_pulse(
    params: EngineParams,
    rho: DensityMatrix,
    ctrl: StepControl | None = None,
) -> tuple[DensityMatrix, float]:
    """
    Resonant pi/2 pulse on e<->i for tau_d = pi/(2 epsilon), dissipators on.

    The pulse is switched on and off suddenly; the energy jumps at both edges
    are booked as extraction work.

    Returns:
        Post-pulse state and W_ext (negative when work is extracted)
    """
    kind = {4: "full", 3: "effective"}.get(rho.dim)
    if kind is None:
        raise ModelError(f"Discharge needs a 3- or 4-level state, got dimension {rho.dim}")
    final, totals = _pulse_stage(
        _stage_model(params, "recharge", kind),
        _stage_model(params, "discharge", kind),
        rho,
        discharge_duration(params),
        ctrl or StepControl(rel_tol=1e-10, abs_tol=1e-13),
    )
    return final, totals.w_ext


@dataclass(frozen=True)
class _Stages:
    recharge: ModelSpec
    discharge: ModelSpec | None
    tau_d: float


def _stages(cfg: CycleConfig, params: EngineParams) -> _Stages:
    if cfg.discharge_mode == "ideal_swap":
        return _Stages(_stage_model(params, "recharge", cfg.model), None, 0.0)
    return _Stages(
        _stage_model(params, "recharge", cfg.model),
        _stage_model(params, "discharge", cfg.model),
        discharge_duration(params),
    )


def _run(cfg: CycleConfig, stages: _Stages, rho: DensityMatrix) -> _CycleOutcome:
    ctrl = cfg.step_control()
    recharge = stages.recharge
    charged, totals = _recharge(recharge, rho, cfg.recharge_time, ctrl)
    if stages.discharge is None:
        end, discharge_totals = _swap_stage(recharge, charged)
    else:
        end, discharge_totals = _pulse_stage(
            recharge, stages.discharge, charged, stages.tau_d, ctrl
        )
    return _CycleOutcome(
        charged,
        end,
        totals + discharge_totals,
        cfg.recharge_time + stages.tau_d,
        recharge.level_energies,
    )


def _leakage(rho: DensityMatrix) -> float:
    """Largest coherence outside the pumped g<->m pair."""
    data = np.abs(rho.data.copy())
    np.fill_diagonal(data, 0.0)
    if "g" in rho.labels and "m" in rho.labels:
        g, m = rho.index("g"), rho.index("m")
        data[g, m] = data[m, g] = 0.0
    return float(data.max())


def _report(outcome: _CycleOutcome, cycles: int) -> CycleReport:
    totals = outcome.totals
    heats = {group: totals.heat_of(group) for group in GROUP_ORDER}
    branch, e_in = select_injected_energy(injected_energy_branches(totals.w_in, heats))
    extracted = -totals.w_ext
    machine_off = extracted <= 0.0
    eta = extracted / e_in if not machine_off and e_in > 0.0 else math.nan
    charged = outcome.charged
    h0 = np.diag(outcome.level_energies)
    return CycleReport(
        w_in=totals.w_in,
        w_ext=totals.w_ext,
        q_gamma_m=heats["gamma_m"],
        q_gamma_i=heats["gamma_i"],
        q_gamma_e=heats["gamma_e"],
        e_in=e_in,
        e_in_branch=branch,
        eta=eta,
        power=extracted / outcome.duration,
        delta_u_cycle=totals.delta_u,
        ergotropy_at_swap=ergotropy(charged, h0),
        machine_off=machine_off,
        duration=outcome.duration,
        leakage=_leakage(charged),
        cycles=cycles,
        first_law_residual=totals.first_law_residual,
    )


def _check_pulse(cfg: CycleConfig, params: EngineParams) -> None:
    if cfg.discharge_mode != "finite_pulse":
        return
    ratio = discharge_duration(params) / cfg.recharge_time
    if ratio > PULSE_RATIO_WARN:
        logger.warning(
            "tau_d/tau_r = %.3g > %g: the pulse is not short against the recharge",
            ratio,
            PULSE_RATIO_WARN,
        )


def run_cycle(
    cfg: CycleConfig, params: EngineParams, rho: DensityMatrix
) -> tuple[DensityMatrix, CycleReport]:
    """
    One recharge stroke followed by one discharge stroke.

    Args:
        cfg: Cycle configuration
        params: Engine parameters
        rho: State at the start of the recharge stroke

    Returns:
        Post-discharge state and the cycle's report
    """
    _check_pulse(cfg, params)
    outcome = _run(cfg, _stages(cfg, params), rho)
    return outcome.end, _report(outcome, cycles=1)


def _hermitian_basis(dim: int) -> list[np.ndarray]:
    """Traceless Hermitian directions with eigenvalues in [-1, 1]."""
    basis = []
    for k in range(dim - 1):
        direction = np.zeros((dim, dim), dtype=complex)
        direction[k, k], direction[k + 1, k + 1] = 1.0, -1.0
        basis.append(direction)
    for k in range(dim):
        for j in range(k + 1, dim):
            symmetric = np.zeros((dim, dim), dtype=complex)
            symmetric[k, j] = symmetric[j, k] = 1.0
            antisymmetric = np.zeros((dim, dim), dtype=complex)
            antisymmetric[k, j], antisymmetric[j, k] = -1j, 1j
            basis.extend([symmetric, antisymmetric])
    return basis


def _real_vec(matrix: np.ndarray) -> np.ndarray:
    flat = np.asarray(matrix).reshape(-1)
    return np.concatenate([flat.real, flat.imag])


class _CycleMap:
    """Cycle map with an evaluation budget."""

    def __init__(self, cfg: CycleConfig, stages: _Stages):
        self.cfg = cfg
        self.stages = stages
        self.calls = 0

    def __call__(self, rho: DensityMatrix) -> _CycleOutcome:
        if self.calls >= self.cfg.max_cycles:
            raise ConvergenceError(
                f"No operational steady state within {self.cfg.max_cycles} cycles"
            )
        self.calls += 1
        return _run(self.cfg, self.stages, rho)


def _distance(a: DensityMatrix, b: DensityMatrix) -> float:
    return float(np.max(np.abs(a.data - b.data)))


def _iterate(cycle: _CycleMap, rho: DensityMatrix) -> _CycleOutcome:
    while True:
        outcome = cycle(rho)
        if _distance(outcome.end, rho) <= cycle.cfg.fp_tol:
            return outcome
        rho = outcome.end


def _affine(cycle: _CycleMap, labels: tuple[str, ...]) -> _CycleOutcome:
    dim = len(labels)
    base = np.eye(dim, dtype=complex) / dim
    directions = _hermitian_basis(dim)
    image = cycle(DensityMatrix(base, labels)).end.data
    columns = []
    for direction in directions:
        response = cycle(DensityMatrix(base + PERTURB_SCALE * direction, labels)).end.data
        columns.append(_real_vec(direction - (response - image) / PERTURB_SCALE))
    system = np.array(columns).T

    coords, *_ = np.linalg.lstsq(system, _real_vec(image - base), rcond=None)
    guess = base + sum(c * d for c, d in zip(coords, directions))
    for _ in range(NEWTON_STEPS):
        rho = DensityMatrix(0.5 * (guess + guess.conj().T), labels)
        outcome = cycle(rho)
        if _distance(outcome.end, rho) <= cycle.cfg.fp_tol:
            return outcome
        correction, *_ = np.linalg.lstsq(
            system, _real_vec(outcome.end.data - rho.data), rcond=None
        )
        guess = rho.data + sum(c * d for c, d in zip(correction, directions))
    logger.debug("affine OSS solve not converged after Newton steps; iterating")
    return _iterate(cycle, DensityMatrix(0.5 * (guess + guess.conj().T), labels))


def _pick_solver(cfg: CycleConfig, stages: _Stages) -> str:
    if cfg.solver != "auto":
        return cfg.solver
    model = stages.recharge
    contraction = slowest_rate(model) * (cfg.recharge_time + stages.tau_d)
    estimate = math.log(1.0 / cfg.fp_tol) / contraction if contraction > 0 else math.inf
    return "affine" if estimate > model.dim**2 else "iterate"


def _solve_oss(cfg: CycleConfig, params: EngineParams) -> tuple[_CycleOutcome, int]:
    stages = _stages(cfg, params)
    model = stages.recharge
    cycle = _CycleMap(cfg, stages)
    if _pick_solver(cfg, stages) == "affine":
        try:
            outcome = _affine(cycle, model.labels)
        except (np.linalg.LinAlgError, PositivityError, ModelError) as e:
            logger.warning("affine OSS solve failed (%s); falling back to iteration", e)
            outcome = _iterate(cycle, model_gibbs_state(model))
    else:
        outcome = _iterate(cycle, model_gibbs_state(model))
    return outcome, cycle.calls


def find_oss(cfg: CycleConfig, params: EngineParams) -> tuple[DensityMatrix, CycleReport]:
    """
    Operational steady state of the cycle.

    Returns:
        The state at the end of the recharge stroke (the one the discharge acts
        on) and the report of the converged cycle

    Raises:
        ConvergenceError: If max_cycles cycles do not reach fp_tol
    """
    _check_pulse(cfg, params)
    outcome, calls = _solve_oss(cfg, params)
    report = _report(outcome, calls)
    if report.leakage > LEAKAGE_WARN:
        logger.warning("OSS coherence leakage %.3e exceeds %g", report.leakage, LEAKAGE_WARN)
    if report.machine_off:
        logger.warning(
            "Machine off at T=%g: W_ext = %.3e >= 0", params.temperature, report.w_ext
        )
    logger.debug("OSS found after %d cycles (eta=%g)", calls, report.eta)
    return outcome.charged, report


@dataclass(frozen=True)
class _SlowRates:
    gamma_plus: float
    gi_plus: float
    gi_minus: float
    ge_plus: float
    ge_minus: float
    gm_plus: float
    gm_minus: float
    p: float

    @property
    def kappa(self) -> float:
        return 2.0 * (self.gamma_plus + self.ge_plus) + self.gi_minus + self.ge_minus

    @property
    def total(self) -> float:
        return self.gamma_plus + self.gi_minus + self.ge_plus + self.ge_minus


def _slow_rates(params: EngineParams) -> _SlowRates:
    t = params.temperature
    gm_plus, gm_minus = natural_rates(params.gamma0_m, params.omega_m - params.omega_i, t)
    gi_plus, gi_minus = natural_rates(params.gamma0_i, params.omega_i, t)
    ge_plus, ge_minus = natural_rates(params.gamma0_e, params.omega_e, t)
    p = pumping_rate(params.amplitude, gm_minus, params.detuning)
    return _SlowRates(
        gamma_plus=gi_plus + p * gm_minus,
        gi_plus=gi_plus,
        gi_minus=gi_minus,
        ge_plus=ge_plus,
        ge_minus=ge_minus,
        gm_plus=gm_plus,
        gm_minus=gm_minus,
        p=p,
    )


def short_cycle_populations(
    params: EngineParams, tau: float
) -> tuple[float, float, float, float]:
    """
    OSS populations at the end of a short recharge stroke.

    r_g + r_e + r_i = 1; r_m is the adiabatically eliminated population on top.

    Returns:
        (r_g, r_m, r_e, r_i)
    """
    if tau < 0:
        raise ModelError(f"Cycle duration must be non-negative, got {tau}")
    rates = _slow_rates(params)
    if rates.total * tau > SHORT_CYCLE_WARN:
        logger.warning(
            "Short-cycle condition violated: sum(gamma)*tau = %.3g > %g",
            rates.total * tau,
            SHORT_CYCLE_WARN,
        )
    gp, gi_m, ge_p, ge_m = rates.gamma_plus, rates.gi_minus, rates.ge_plus, rates.ge_minus
    denominator = rates.kappa - (ge_m * (gp + gi_m) + ge_p * gi_m) * tau
    r_i = (gp + ge_p - ge_p * gi_m * tau) / denominator
    r_e = (r_i * (1.0 - (ge_p + ge_m) * tau) + ge_p * tau) / (1.0 + ge_p * tau)
    r_g = 1.0 - r_e - r_i
    r_m = (rates.gm_plus * r_e + rates.p * rates.gm_minus * r_g) / rates.gm_minus
    if any(not 0.0 <= r <= 1.0 for r in (r_g, r_m, r_e, r_i)):
        logger.warning(
            "Short-cycle populations outside [0, 1] at tau=%g: "
            "r_g=%.3g r_m=%.3g r_e=%.3g r_i=%.3g",
            tau,
            r_g,
            r_m,
            r_e,
            r_i,
        )
    return r_g, r_m, r_e, r_i


def short_cycle_report(params: EngineParams, tau: float) -> ShortCycleReport:
    """
    Closed-form thermodynamics of the short cycle.

    Every extensive quantity is linear in tau, so eta and power do not depend
    on it.
    """
    if not tau > 0:
        raise ModelError(f"Cycle duration must be positive, got {tau}")
    r_g, r_m, r_e, r_i = short_cycle_populations(params, tau)
    rates = _slow_rates(params)
    kappa = rates.kappa
    pumped = rates.p * rates.gm_minus
    detuning = params.detuning
    carrier = (rates.gi_minus + rates.ge_minus) / kappa * tau

    w_in = params.omega_f * pumped * carrier
    q_e = (
        params.omega_e
        * (rates.ge_plus * rates.gi_minus - rates.gamma_plus * rates.ge_minus)
        / kappa
        * tau
        - rates.p * rates.ge_plus * detuning * carrier
    )
    q_i = (
        params.omega_i
        * (rates.gi_plus * rates.ge_minus - rates.gi_minus * (rates.ge_plus + pumped))
        / kappa
        * tau
        - rates.p * rates.gi_plus * detuning * carrier
    )
    q_m = (params.omega_i - params.omega_f) * pumped * carrier
    stored = (
        (params.omega_i - params.omega_e)
        * (rates.gamma_plus * rates.ge_minus - rates.gi_minus * rates.ge_plus)
        / kappa
        * tau
    )
    heats = {"gamma_m": q_m, "gamma_i": q_i, "gamma_e": q_e}
    branch, e_in = select_injected_energy(injected_energy_branches(w_in, heats))
    machine_off = stored <= 0.0
    return ShortCycleReport(
        r_g=r_g,
        r_e=r_e,
        r_i=r_i,
        r_m=r_m,
        kappa=kappa,
        w_in=w_in,
        q_gamma_e=q_e,
        q_gamma_i=q_i,
        q_gamma_m=q_m,
        e_in=e_in,
        e_in_branch=branch,
        ergotropy=stored,
        eta=stored / e_in if not machine_off and e_in > 0.0 else math.nan,
        power=stored / tau,
        tau=tau,
        machine_off=machine_off,
    )


def _reference_frequency(params: EngineParams, branch: str | None) -> float:
    if branch is None:
        branch = "above" if params.omega_f >= params.omega_i else "below"
    if branch not in ("above", "below"):
        raise ModelError(f"Unknown branch {branch!r}; expected 'above' or 'below'")
    return params.omega_f if branch == "above" else params.omega_i


def otto_limit_efficiency(params: EngineParams, branch: str | None = None) -> float:
    """
    Low-temperature short-cycle efficiency with gamma^- -> gamma_0.

    Args:
        params: Engine parameters
        branch: "above" (omega_f >= omega_i) or "below"; chosen from params if None
    """
    total = params.gamma0_e + params.gamma0_i
    if not total > 0:
        raise ModelError("Otto limit needs gamma0_e + gamma0_i > 0")
    reference = _reference_frequency(params, branch)
    return (params.omega_i - params.omega_e) / reference * params.gamma0_e / total


def exact_low_temperature_efficiency(params: EngineParams, branch: str | None = None) -> float:
    """Low-temperature short-cycle efficiency before gamma^- is replaced by gamma_0."""
    rates = _slow_rates(params)
    pumped = rates.p * rates.gm_minus
    denominator = pumped * (rates.gi_minus + rates.ge_minus)
    if not denominator > 0:
        raise ModelError("Efficiency is undefined without pumping")
    reference = _reference_frequency(params, branch)
    numerator = rates.gamma_plus * rates.ge_minus - rates.gi_minus * rates.ge_plus
    return (params.omega_i - params.omega_e) / reference * numerator / denominator


def short_cycle_nominal(params: EngineParams) -> ShortCycleReport:
    """Short-cycle report at a duration well inside the short-cycle regime."""
    total = _slow_rates(params).total
    return short_cycle_report(params, SHORT_CYCLE_SPAN / total if total > 0 else 1.0)


def _machine_off(params: EngineParams, cfg: CycleConfig | None, mode: str) -> bool:
    if mode == "short_cycle":
        return short_cycle_nominal(params).machine_off
    gi_minus = natural_rates(params.gamma0_i, params.omega_i, params.temperature)[1]
    base = cfg or CycleConfig(recharge_time=1.0)
    asymptotic = base.model_copy(update={"recharge_time": 10.0 / gi_minus})
    outcome, _ = _solve_oss(asymptotic, params)
    return -outcome.totals.w_ext <= 0.0


def shutdown_temperature(
    params: EngineParams,
    cfg: CycleConfig | None = None,
    mode: str = "short_cycle",
    bracket: tuple[float, float] = (0.0, 1.0),
    resolution: float = 1e-3,
) -> float:
    """
    Bath temperature above which no work is extracted, by bisection.

    Args:
        params: Engine parameters; the temperature field is scanned
        cfg: Cycle settings for mode "asymptotic" (tau_r is set to 10/gamma_i^-)
        mode: "short_cycle" (closed forms) or "asymptotic" (numeric OSS)
        bracket: (cold, hot) temperatures with the machine on at cold, off at hot
        resolution: Bracket width at which bisection stops

    Raises:
        ModelError: If the bracket does not straddle the shutdown
    """
    if mode not in ("short_cycle", "asymptotic"):
        raise ModelError(f"Unknown shutdown mode {mode!r}")
    cold, hot = bracket
    if not 0.0 <= cold < hot:
        raise ModelError(f"Invalid bracket {bracket}")

    def off(temperature: float) -> bool:
        return _machine_off(params.replace(temperature=temperature), cfg, mode)

    if off(cold) or not off(hot):
        raise ModelError(f"Machine does not switch off inside bracket {bracket}")
    while hot - cold > resolution:
        middle = 0.5 * (cold + hot)
        if off(middle):
            hot = middle
        else:
            cold = middle
    return 0.5 * (cold + hot)


def _ergotropy_balance(temperature: float, params: EngineParams) -> float:
    rates = _slow_rates(params.replace(temperature=temperature))
    return rates.gamma_plus * rates.ge_minus - rates.gi_minus * rates.ge_plus


def analytic_shutdown_temperature(
    params: EngineParams, bracket: tuple[float, float] = (0.0, 1.0)
) -> float:
    """Root in T of Gamma_i^+ gamma_e^- = gamma_i^- gamma_e^+."""
    cold, hot = bracket
    f_cold = _ergotropy_balance(cold, params)
    f_hot = _ergotropy_balance(hot, params)
    if f_cold * f_hot > 0:
        raise ModelError(f"No shutdown root inside bracket {bracket}")
    return float(brentq(_ergotropy_balance, cold, hot, args=(params,), xtol=1e-12))
