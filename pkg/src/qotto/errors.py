"""
Exception hierarchy for qotto.
Validation problems derive from ValueError, numeric failures from ArithmeticError.
"""


class QottoError(Exception):
    """Base exception for all qotto errors."""

    pass


class ConfigError(QottoError, ValueError):
    """Raised when a scenario file or parameter set is invalid."""

    pass


class ModelError(QottoError, ValueError):
    """Raised when an operator, state or model is malformed."""

    pass


class NumericError(QottoError, ArithmeticError):
    """Base exception for failures during integration or fixed-point search."""

    pass


class PositivityError(NumericError):
    """Raised when a state has an eigenvalue below the positivity tolerance."""

    def __init__(self, min_eigenvalue: float, time: float | None = None):
        self.min_eigenvalue = min_eigenvalue
        self.time = time
        where = "" if time is None else f" at t={time:g}"
        super().__init__(
            f"Positivity violated{where}: min eigenvalue {min_eigenvalue:.3e}"
        )

    def __reduce__(self):
        return (self.__class__, (self.min_eigenvalue, self.time))


class TraceDriftError(NumericError):
    """Raised when the trace drifts further than renormalization may hide."""

    def __init__(self, drift: float, time: float):
        self.drift = drift
        self.time = time
        super().__init__(f"Trace drift {drift:.3e} at t={time:g}")

    def __reduce__(self):
        return (self.__class__, (self.drift, self.time))


class StepUnderflowError(NumericError):
    """Raised when the adaptive step collapses below the representable floor."""

    def __init__(self, step: float, time: float):
        self.step = step
        self.time = time
        super().__init__(f"Step size underflow (h={step:.3e}) at t={time:g}")

    def __reduce__(self):
        return (self.__class__, (self.step, self.time))


class ConvergenceError(NumericError):
    """Raised when a steady state or fixed point is not reached in budget."""

    pass


class BookkeepingError(NumericError):
    """Raised when thermodynamic totals are mutually inconsistent."""

    pass


class SweepError(QottoError):
    """Raised when a grid point of a sweep fails."""

    def __init__(self, point: dict[str, float], cause: Exception):
        self.point = point
        self.cause = cause
        coords = ", ".join(f"{k}={v:g}" for k, v in point.items())
        super().__init__(f"Grid point ({coords}) failed: {cause}")
