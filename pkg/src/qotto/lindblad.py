"""
Master-equation models and their integration in the rotating frame.

A ModelSpec fixes level energies, coherent drives and jump channels. The
generator is built once as a row-major superoperator (vec(A X B) =
(A kron B^T) vec(X)) and integrated by the Dormand-Prince stepper. States are
re-hermitized and checked for trace drift and positivity after every accepted
step; observers see each accepted step together with its stage states.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceError,
    ModelError,
    PositivityError,
    StepUnderflowError,
    TraceDriftError,
)
from .integrator import WEIGHTS, DormandPrince54, PIController
from .qcore import POSITIVITY_TOL, TRACE_TOL, DensityMatrix, OperatorMatrix, as_array

logger = logging.getLogger(__name__)

FRAMES = ("rotating", "lab")
NESS_RTOL = 1e-10
SETTLE_TOL = 1e-4
NESS_STATE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class JumpChannel:
    """
    One dissipative term rate * (J rho J^H - 1/2 {J^H J, rho}).

    Attributes:
        name: Channel id such as "gamma_i-"
        jump: Jump operator J
        rate: Rate in units of omega_i
        bohr_energy: Energy carried by one quantum
        group: Heat bookkeeping group ("gamma_m", "gamma_i", "gamma_e")
        work_fraction: Share of the transported energy booked as drive work
    """

    name: str
    jump: OperatorMatrix
    rate: float
    bohr_energy: float
    group: str = ""
    work_fraction: float = 0.0

    def __post_init__(self):
        if not isinstance(self.jump, OperatorMatrix):
            object.__setattr__(self, "jump", OperatorMatrix(self.jump))
        if not self.rate >= 0.0:
            raise ModelError(f"Channel {self.name} has negative rate {self.rate}")
        if not self.group:
            object.__setattr__(self, "group", self.name.rstrip("+-"))

    @property
    def is_ladder(self) -> bool:
        return int(np.count_nonzero(self.jump.data)) == 1


@dataclass(frozen=True)
class DriveSpec:
    """Coherent drive amplitude*(sigma_lu e^{i w t} + h.c.) on (lower, upper)."""

    name: str
    amplitude: float
    frequency: float
    transition: tuple[str, str]

    def __post_init__(self):
        if not self.amplitude >= 0.0:
            raise ModelError(f"Drive {self.name} has negative amplitude")
        lower, upper = self.transition
        if lower == upper:
            raise ModelError(f"Drive {self.name} couples {lower} to itself")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Level structure, drives, channels and bath temperature of one model."""

    labels: tuple[str, ...]
    level_energies: tuple[float, ...]
    drives: tuple[DriveSpec, ...] = ()
    channels: tuple[JumpChannel, ...] = ()
    bath_temperature: float = 0.0
    frame: str = "rotating"
    level_shifts: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(
            self, "level_energies", tuple(float(e) for e in self.level_energies)
        )
        object.__setattr__(self, "drives", tuple(self.drives))
        object.__setattr__(self, "channels", tuple(self.channels))

        energies = self.level_energies
        if len(energies) != len(self.labels):
            raise ModelError("One energy per level label is required")
        if energies[0] != 0.0:
            raise ModelError(f"Ground energy must be 0, got {energies[0]}")
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise ModelError(f"Level energies must ascend strictly: {energies}")
        if not self.bath_temperature >= 0.0:
            raise ModelError("Bath temperature must be non-negative")
        if self.frame not in FRAMES:
            raise ModelError(f"Unknown frame {self.frame!r}; expected one of {FRAMES}")
        if self.level_shifts is not None:
            if len(self.level_shifts) != self.dim:
                raise ModelError("One level shift per level is required")
            object.__setattr__(
                self, "level_shifts", tuple(float(s) for s in self.level_shifts)
            )
            driven = {label for drive in self.drives for label in drive.transition}
            for label, shift in zip(self.labels, self.level_shifts):
                if shift != 0.0 and label in driven:
                    raise ModelError(f"Level shift on driven level {label!r}")
        for drive in self.drives:
            lower, upper = drive.transition
            if self.energy(upper) <= self.energy(lower):
                raise ModelError(f"Drive {drive.name}: upper level must lie above lower")
        for channel in self.channels:
            if channel.jump.dim != self.dim:
                raise ModelError(
                    f"Channel {channel.name} acts on dimension {channel.jump.dim}, "
                    f"model has {self.dim}"
                )

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as e:
            raise ModelError(f"Level {label!r} not in model {self.labels}") from e

    def energy(self, label: str) -> float:
        return self.level_energies[self.index(label)]

    def h0(self) -> OperatorMatrix:
        return OperatorMatrix(np.diag(self.level_energies), self.labels)

    def detuning(self, drive: DriveSpec) -> float:
        lower, upper = drive.transition
        return drive.frequency - (self.energy(upper) - self.energy(lower))

    def drive(self, name: str) -> DriveSpec | None:
        for drive in self.drives:
            if drive.name == name:
                return drive
        return None

    def channel_groups(self) -> tuple[str, ...]:
        groups: list[str] = []
        for channel in self.channels:
            if channel.group not in groups:
                groups.append(channel.group)
        return tuple(groups)


@dataclass(frozen=True)
class StepControl:
    """Tolerances and step limits of the adaptive stepper."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_step_factor: float = 2.0
    max_step: float | None = None
    first_step: float | None = None
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ModelError("Step tolerances must be positive")
        if not self.max_step_factor > 0:
            raise ModelError("max_step_factor must be positive")
        if self.max_steps < 1:
            raise ModelError("max_steps must be at least 1")


@dataclass
class StepRecord:
    """One accepted step as seen by observers (flat row-major state vectors)."""

    t: float
    h: float
    t_next: float
    state: np.ndarray
    new_state: np.ndarray
    stage_states: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray

    @property
    def quadrature_state(self) -> np.ndarray:
        """Sum_j b_j Y_j: any linear rate integrates to h * rate(quadrature_state)."""
        return self.weights @ self.stage_states


class Observer(Protocol):
    def start(self, t: float, state: np.ndarray, eigenvalues: np.ndarray) -> None: ...

    def observe(self, record: StepRecord) -> None: ...


ObserverSet = Sequence[Observer]


@dataclass
class Trajectory:
    """Accepted times and rotating-frame states of one integration."""

    times: np.ndarray
    states: np.ndarray
    labels: tuple[str, ...]
    accepted: int = 0
    rejected: int = 0
    frame: str = "rotating"

    def __len__(self) -> int:
        return len(self.times)

    @property
    def step_stats(self) -> dict[str, int]:
        return {"accepted": self.accepted, "rejected": self.rejected}

    def state(self, k: int) -> DensityMatrix:
        return DensityMatrix(self.states[k], self.labels)

    def final_state(self) -> DensityMatrix:
        return self.state(-1)

    def population(self, label: str) -> np.ndarray:
        k = self.labels.index(label)
        return np.real(self.states[:, k, k])

    def index_at(self, t: float) -> int:
        """Index of the last sample at or before t."""
        return int(np.searchsorted(self.times, t * (1 + 1e-12), side="right")) - 1


def frame_energies(model: ModelSpec) -> np.ndarray:
    """
    Energies of the rotating-frame reference Hamiltonian H_0'.

    Each drive shifts its upper level by its detuning so that it becomes
    resonant in the frame.
    """
    energies = np.array(model.level_energies)
    shifted: set[int] = set()
    detuned = False
    for drive in model.drives:
        lower, upper = (model.index(label) for label in drive.transition)
        delta = model.detuning(drive)
        if delta == 0.0:
            continue
        if upper in shifted or lower in shifted:
            raise ModelError(
                f"Unsupported drive layout: drive {drive.name} chains onto a "
                "level already shifted by another detuned drive"
            )
        energies[upper] += delta
        shifted.add(upper)
        detuned = True
    if detuned and len(model.drives) > 1:
        for channel in model.channels:
            if not channel.is_ladder:
                raise ModelError(
                    f"Unsupported drive layout: channel {channel.name} is not a "
                    "ladder operator under detuned multi-drive"
                )
    return energies


def drive_operator(model: ModelSpec) -> np.ndarray:
    """Sum of amplitude*(sigma_lu + sigma_ul) over drives (time-independent in the frame)."""
    matrix = np.zeros((model.dim, model.dim), dtype=complex)
    for drive in model.drives:
        lower, upper = (model.index(label) for label in drive.transition)
        matrix[lower, upper] += drive.amplitude
        matrix[upper, lower] += drive.amplitude
    return matrix


def energy_operator(model: ModelSpec) -> np.ndarray:
    """Frame-consistent Hamiltonian H_0 + V used for internal energy and heat."""
    return np.diag(np.array(model.level_energies, dtype=complex)) + drive_operator(
        model
    )


def rotating_generator(
    model: ModelSpec,
) -> tuple[OperatorMatrix, tuple[JumpChannel, ...]]:
    """
    Build the time-independent rotating-frame Hamiltonian.

    Returns:
        V_bar with rho_dot = -i[V_bar, rho] + L(rho), and the unchanged channels

    Raises:
        ModelError: For drive layouts that cannot be made time-independent
    """
    shifts = np.array(model.level_energies) - frame_energies(model)
    if model.level_shifts is not None:
        shifts = shifts + np.array(model.level_shifts)
    v_bar = drive_operator(model) + np.diag(shifts)
    return OperatorMatrix(v_bar, model.labels), model.channels


def _check_dims(channel: JumpChannel, rho: np.ndarray) -> None:
    if rho.shape != channel.jump.data.shape:
        raise ModelError(
            f"Dimension mismatch: channel {channel.name} is "
            f"{channel.jump.data.shape}, state is {rho.shape}"
        )


def dissipator_apply(channel: JumpChannel, rho) -> OperatorMatrix:
    """Return rate * (J rho J^H - 1/2 {J^H J, rho})."""
    state = as_array(rho)
    _check_dims(channel, state)
    jump = channel.jump.data
    jump_dag = jump.conj().T
    number = jump_dag @ jump
    result = jump @ state @ jump_dag - 0.5 * (number @ state + state @ number)
    return OperatorMatrix(channel.rate * result)


def dissipator_superoperator(channel: JumpChannel) -> np.ndarray:
    jump = channel.jump.data
    identity = np.eye(jump.shape[0])
    number = jump.conj().T @ jump
    return channel.rate * (
        np.kron(jump, jump.conj())
        - 0.5 * np.kron(number, identity)
        - 0.5 * np.kron(identity, number.T)
    )


def liouvillian(model: ModelSpec) -> np.ndarray:
    """Row-major superoperator of -i[V_bar, .] + sum of dissipators."""
    v_bar, channels = rotating_generator(model)
    identity = np.eye(model.dim)
    generator = -1j * (np.kron(v_bar.data, identity) - np.kron(identity, v_bar.data.T))
    for channel in channels:
        if channel.rate > 0.0:
            generator = generator + dissipator_superoperator(channel)
    return generator


def rate_scale(model: ModelSpec) -> float:
    """Fastest rate in the generator: channel rates and |V_bar| entries."""
    v_bar, channels = rotating_generator(model)
    rates = [channel.rate for channel in channels]
    return float(max(rates + [float(np.max(np.abs(v_bar.data)))]))


def slowest_rate(model: ModelSpec) -> float:
    """Smallest channel rate that is not negligible against the fastest one."""
    scale = rate_scale(model)
    rates = [c.rate for c in model.channels if c.rate > 1e-12 * scale]
    return min(rates) if rates else scale


def relaxation_rate(model: ModelSpec) -> float:
    """
    Liouvillian gap: the smallest |Re lambda| among the non-stationary modes.

    Channels much slower than this gap (uphill rates deep in the Boltzmann
    tail) do not set the time the model needs to settle.
    """
    scale = rate_scale(model)
    if scale <= 0.0:
        return 0.0
    eigenvalues = scipy.linalg.eigvals(liouvillian(model))
    decay = np.abs(eigenvalues[np.argsort(np.abs(eigenvalues))[1:]].real)
    damped = decay[decay > 1e-12 * scale]
    return float(np.min(damped)) if damped.size else slowest_rate(model)


def steady_state(model: ModelSpec) -> DensityMatrix:
    """
    Solve L_total(rho) = 0 with Tr rho = 1 by least squares.

    Raises:
        ModelError: If the stationary state is not unique
    """
    dim = model.dim
    generator = liouvillian(model)
    scale = max(rate_scale(model), 1e-300)
    trace_row = scale * np.eye(dim).reshape(1, -1)
    system = np.vstack([generator, trace_row])
    rhs = np.zeros(dim * dim + 1, dtype=complex)
    rhs[-1] = scale
    solution, _, rank, _ = scipy.linalg.lstsq(system, rhs, lapack_driver="gelsy")
    if rank < dim * dim:
        raise ModelError(f"Stationary state is not unique (rank {rank} < {dim * dim})")
    rho = solution.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.real(np.trace(rho)), model.labels)


def to_lab_frame(rho, model: ModelSpec, t: float) -> DensityMatrix:
    """Undo the rotating frame: rho_kl -> rho_kl exp(-i (E'_k - E'_l) t)."""
    state = as_array(rho)
    energies = frame_energies(model)
    phases = np.exp(-1j * np.subtract.outer(energies, energies) * t)
    return DensityMatrix(state * phases, model.labels)


class Propagator:
    """
    Resumable adaptive integration of one model from one initial state.

    Step size and controller memory survive between advance() calls, so a
    long run can be split into segments without restarting the stepper.
    """

    def __init__(
        self,
        model: ModelSpec,
        rho0: DensityMatrix,
        ctrl: StepControl | None = None,
        observers: ObserverSet = (),
        t_start: float = 0.0,
    ):
        if tuple(rho0.labels) != model.labels:
            raise ModelError(
                f"State basis {rho0.labels} does not match model {model.labels}"
            )
        self.model = model
        self.ctrl = ctrl or StepControl()
        self.observers = tuple(observers)
        self.stepper = DormandPrince54(liouvillian(model))
        self.controller = PIController()

        scale = rate_scale(model)
        if self.ctrl.max_step is not None:
            self.max_step = self.ctrl.max_step
        elif scale > 0.0:
            self.max_step = self.ctrl.max_step_factor / scale
        else:
            self.max_step = math.inf
        if self.ctrl.first_step is not None:
            self.h = self.ctrl.first_step
        else:
            self.h = min(self.max_step, 0.01 / scale) if scale > 0.0 else math.inf

        self.dim = model.dim
        self.t = float(t_start)
        self.y = np.array(rho0.data, dtype=complex).reshape(-1)
        self.slope = self.stepper.slope(self.y)
        self.times = [self.t]
        self.states = [self.y.copy()]
        self.accepted = 0
        self.rejected = 0

        eigenvalues = np.linalg.eigvalsh(rho0.data)
        for observer in self.observers:
            observer.start(self.t, self.y, eigenvalues)

    def _finish_step(self, y_new: np.ndarray, t_new: float) -> tuple[np.ndarray, np.ndarray]:
        rho = y_new.reshape(self.dim, self.dim)
        rho = 0.5 * (rho + rho.conj().T)
        trace = float(np.real(np.trace(rho)))
        drift = abs(trace - 1.0)
        if drift > TRACE_TOL:
            raise TraceDriftError(drift, t_new)
        rho = rho / trace
        eigenvalues = np.linalg.eigvalsh(rho)
        if eigenvalues[0] < -POSITIVITY_TOL:
            raise PositivityError(float(eigenvalues[0]), t_new)
        return rho.reshape(-1), eigenvalues

    def advance(self, t_end: float) -> "Propagator":
        """Integrate up to exactly t_end."""
        if not t_end > self.t:
            raise ModelError(f"t_end={t_end} must lie after current time {self.t}")
        ctrl = self.ctrl
        while self.t < t_end:
            remaining = t_end - self.t
            h = min(self.h, self.max_step, remaining)
            clipped = h < min(self.h, self.max_step)
            attempt = self.stepper.attempt(
                self.y, h, self.slope, ctrl.rel_tol, ctrl.abs_tol
            )
            if attempt.error > 1.0:
                self.rejected += 1
                self.h = self.controller.next_step(h, attempt.error, accepted=False)
                floor = 16 * np.spacing(max(abs(self.t), 1.0))
                if self.h < floor:
                    raise StepUnderflowError(self.h, self.t)
                continue

            t_new = t_end if remaining - h <= 1e-12 * max(abs(t_end), 1.0) else self.t + h
            y_new, eigenvalues = self._finish_step(attempt.y_new, t_new)
            record = StepRecord(
                t=self.t,
                h=h,
                t_next=t_new,
                state=self.y,
                new_state=y_new,
                stage_states=attempt.stage_states,
                weights=WEIGHTS,
                eigenvalues=eigenvalues,
            )
            for observer in self.observers:
                observer.observe(record)

            self.t = t_new
            self.y = y_new
            self.slope = self.stepper.slope(y_new)
            proposal = self.controller.next_step(h, attempt.error, accepted=True)
            if not clipped:
                self.h = proposal
            self.accepted += 1
            self.times.append(self.t)
            self.states.append(y_new)
            if self.accepted > ctrl.max_steps:
                raise ConvergenceError(
                    f"Exceeded {ctrl.max_steps} steps before t={t_end:g}"
                )
        return self

    def state(self) -> DensityMatrix:
        return DensityMatrix(self.y.reshape(self.dim, self.dim), self.model.labels)

    def residual(self) -> float:
        """max |L_total(rho)| at the current state."""
        return float(np.max(np.abs(self.slope)))

    def trajectory(self) -> Trajectory:
        states = np.array(self.states).reshape(-1, self.dim, self.dim)
        trajectory = Trajectory(
            times=np.array(self.times),
            states=states,
            labels=self.model.labels,
            accepted=self.accepted,
            rejected=self.rejected,
        )
        if self.model.frame == "lab":
            trajectory.states = np.array(
                [
                    to_lab_frame(s, self.model, t).data
                    for s, t in zip(states, trajectory.times)
                ]
            )
            trajectory.frame = "lab"
        return trajectory


def evolve(
    model: ModelSpec,
    rho0: DensityMatrix,
    t_end: float,
    ctrl: StepControl | None = None,
    observers: ObserverSet = (),
    t_start: float = 0.0,
) -> Trajectory:
    """
    Integrate the master equation from t_start to t_end.

    Args:
        model: Model to integrate
        rho0: Initial state in the model's basis
        t_end: Final time
        ctrl: Step control, defaults to StepControl()
        observers: Accumulators invoked on every accepted step
        t_start: Initial time

    Returns:
        Trajectory of accepted steps

    Raises:
        StepUnderflowError: If the step size collapses
        PositivityError: If a state leaves the positive cone
        TraceDriftError: If the trace drifts beyond 1e-9
    """
    if not t_end > t_start:
        raise ModelError(f"t_end={t_end} must be greater than t_start={t_start}")
    propagator = Propagator(model, rho0, ctrl, observers, t_start)
    propagator.advance(t_end)
    logger.debug(
        "evolve: %d accepted, %d rejected steps to t=%g",
        propagator.accepted,
        propagator.rejected,
        t_end,
    )
    return propagator.trajectory()


@dataclass
class NessResult:
    """Steady state, its convergence time and the run that reached it."""

    state: DensityMatrix
    tau: float
    residual: float
    trajectory: Trajectory
    settle_tol: float = SETTLE_TOL
    propagator: Propagator | None = field(default=None, repr=False)


def convergence_time(trajectory: Trajectory, target: np.ndarray, settle_tol: float) -> float:
    """Earliest time after which every sample stays within settle_tol of target."""
    distance = np.max(np.abs(trajectory.states - target), axis=(1, 2))
    outside = np.nonzero(distance > settle_tol)[0]
    if outside.size == 0:
        return float(trajectory.times[0])
    last = int(outside[-1])
    if last + 1 >= len(trajectory):
        return float(trajectory.times[-1])
    return float(trajectory.times[last + 1])


def find_ness(
    model: ModelSpec,
    rho0: DensityMatrix,
    tol: float | None = None,
    ctrl: StepControl | None = None,
    observers: ObserverSet = (),
    settle_tol: float = SETTLE_TOL,
    max_time: float | None = None,
) -> NessResult:
    """
    Steady state of the rotating-frame generator and the time taken to reach it.

    The state itself comes from the null space of the Liouvillian. The master
    equation is then marched from rho0 until it lies within NESS_STATE_TOL of
    that state, or until the generator residual drops below tol, and tau is
    read off the marched run. When the null space is degenerate only the
    residual stops the march and the final marched state is returned.

    Args:
        model: Model whose steady state is sought
        rho0: Initial state (the Gibbs state for charging runs)
        tol: Bound on max |L_total(rho)|; defaults to 1e-10 * rate_scale
        ctrl: Step control
        observers: Accumulators attached to the marching run
        settle_tol: Distance defining the convergence time tau
        max_time: Horizon; defaults to 1e3 / relaxation_rate

    Returns:
        NessResult with the steady state and tau

    Raises:
        ConvergenceError: If the run has not settled at max_time
    """
    if model.frame != "rotating":
        model = replace(model, frame="rotating")
    scale = rate_scale(model)
    if tol is None:
        tol = NESS_RTOL * scale
    if max_time is None:
        max_time = 1e3 / relaxation_rate(model) if scale > 0.0 else 1.0

    try:
        target = steady_state(model).data
    except ModelError as e:
        logger.info("find_ness: %s; stopping on the residual alone", e)
        target = None
    state_tol = min(NESS_STATE_TOL, settle_tol)

    def settled() -> bool:
        if propagator.residual() <= tol:
            return True
        if target is None:
            return False
        distance = np.max(np.abs(propagator.y.reshape(target.shape) - target))
        return bool(distance <= state_tol)

    propagator = Propagator(model, rho0, ctrl, observers)
    chunk = 10.0 / scale if scale > 0.0 else max_time
    while not settled():
        if propagator.t >= max_time:
            raise ConvergenceError(
                f"No steady state within t={max_time:g}: residual "
                f"{propagator.residual():.3e} > tol {tol:.3e}"
            )
        propagator.advance(min(propagator.t + chunk, max_time))
        chunk *= 2.0

    trajectory = propagator.trajectory()
    if target is None:
        target = trajectory.states[-1]
    tau = convergence_time(trajectory, target, settle_tol)
    residual = float(np.max(np.abs(propagator.stepper.slope(target.reshape(-1)))))
    logger.debug(
        "find_ness: residual %.3e after t=%g (%d steps), tau=%g",
        residual,
        propagator.t,
        propagator.accepted,
        tau,
    )
    return NessResult(
        state=DensityMatrix(target, model.labels),
        tau=tau,
        residual=residual,
        trajectory=trajectory,
        settle_tol=settle_tol,
        propagator=propagator,
    )
