"""
Embedded Runge-Kutta 5(4) stepper with PI step-size control.

The stepper works on flat complex vectors and a linear right-hand side
y' = L y. Every attempt exposes its stage states and quadrature weights so
that observers can integrate linear functionals of the state with the same
quadrature the stepper uses.
"""

from dataclasses import dataclass

import numpy as np

# Dormand-Prince 5(4), first-same-as-last. Row k holds the coefficients that
# build stage k+1 from the slopes of stages 0..k.
BT = {
    0: [1 / 5],
    1: [3 / 40, 9 / 40],
    2: [44 / 45, -56 / 15, 32 / 9],
    3: [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    4: [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    5: [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
}

# 5th order weights minus embedded 4th order weights
TR = [
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
]

EVAL_STAGES = [0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0]

STAGES = 7
ORDER = 5


def _tableau() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = np.zeros((STAGES, STAGES))
    for row, coefficients in BT.items():
        a[row + 1, : len(coefficients)] = coefficients
    weights = np.zeros(STAGES)
    weights[:6] = BT[5]
    return a, weights, np.array(TR)


A, WEIGHTS, ERROR_WEIGHTS = _tableau()


@dataclass
class StepAttempt:
    """Result of one trial step; accepted or not by the controller."""

    h: float
    y_new: np.ndarray
    stage_states: np.ndarray
    slopes: np.ndarray
    error: float


def scaled_error(
    delta: np.ndarray,
    y0: np.ndarray,
    y1: np.ndarray,
    rel_tol: float,
    abs_tol: float,
) -> float:
    """RMS of the error estimate scaled by the mixed tolerance per component."""
    scale = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((np.abs(delta) / scale) ** 2)))


class DormandPrince54:
    """Dormand-Prince pair for a linear, time-independent generator."""

    def __init__(self, generator: np.ndarray):
        self.generator = generator

    def slope(self, y: np.ndarray) -> np.ndarray:
        return self.generator @ y

    def attempt(
        self,
        y: np.ndarray,
        h: float,
        first_slope: np.ndarray,
        rel_tol: float,
        abs_tol: float,
    ) -> StepAttempt:
        slopes = np.empty((STAGES, y.size), dtype=complex)
        states = np.empty((STAGES, y.size), dtype=complex)
        slopes[0] = first_slope
        states[0] = y
        for stage in range(1, STAGES):
            states[stage] = y + h * (A[stage, :stage] @ slopes[:stage])
            slopes[stage] = self.slope(states[stage])
        y_new = states[STAGES - 1]
        delta = h * (ERROR_WEIGHTS @ slopes)
        error = scaled_error(delta, y, y_new, rel_tol, abs_tol)
        return StepAttempt(h, y_new, states, slopes, error)


@dataclass
class PIController:
    """
    Proportional-integral step-size controller.

    The next step is h * safety * err^-(icoeff+pcoeff)/order * err_prev^(pcoeff/order),
    clipped to [factormin, factormax]. Rejected steps fall back to the
    integral term alone and never grow.
    """

    pcoeff: float = 0.4
    icoeff: float = 0.3
    safety: float = 0.9
    factormin: float = 0.2
    factormax: float = 10.0
    order: int = ORDER
    previous_error: float = 1.0

    def next_step(self, h: float, error: float, accepted: bool) -> float:
        error = max(error, 1e-10)
        if not accepted:
            factor = self.safety * error ** (-1.0 / self.order)
            return h * min(1.0, max(self.factormin, factor))
        factor = (
            self.safety
            * error ** (-(self.icoeff + self.pcoeff) / self.order)
            * self.previous_error ** (self.pcoeff / self.order)
        )
        self.previous_error = error
        return h * min(self.factormax, max(self.factormin, factor))
