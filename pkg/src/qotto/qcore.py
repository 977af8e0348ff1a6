"""
Dense operator algebra for 2-4 level systems.
Density matrices, operators, spectra, entropy and expectation values.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ModelError, PositivityError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9

DEFAULT_LABELS: dict[int, tuple[str, ...]] = {
    2: ("g", "i"),
    3: ("g", "i", "m"),
    4: ("g", "e", "i", "m"),
}


def _frozen_copy(data) -> np.ndarray:
    array = np.array(data, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


def _resolve_labels(dim: int, labels: Sequence[str] | None) -> tuple[str, ...]:
    if labels is None:
        if dim not in DEFAULT_LABELS:
            raise ModelError(f"No default level labels for dimension {dim}")
        return DEFAULT_LABELS[dim]
    labels = tuple(labels)
    if len(labels) != dim:
        raise ModelError(f"{len(labels)} labels given for dimension {dim}")
    if len(set(labels)) != dim:
        raise ModelError(f"Level labels must be distinct: {labels}")
    return labels


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square complex matrix over an ordered level basis (H_0, V, sigma_kl)."""

    data: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        array = _frozen_copy(self.data)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ModelError(f"Operator must be square, got shape {array.shape}")
        object.__setattr__(self, "data", array)
        if self.labels is not None:
            object.__setattr__(
                self, "labels", _resolve_labels(array.shape[0], self.labels)
            )

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.data.conj().T, self.labels)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.data + as_array(other), self.labels)

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.data * scalar, self.labels)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian, unit-trace, positive semidefinite state over labelled levels.

    Validation runs on construction; an instance is always a physical state
    within the module tolerances.
    """

    data: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        array = _frozen_copy(self.data)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ModelError(f"State must be square, got shape {array.shape}")
        dim = array.shape[0]
        if not 2 <= dim <= 4:
            raise ModelError(f"State dimension must be 2-4, got {dim}")
        object.__setattr__(self, "data", array)
        object.__setattr__(self, "labels", _resolve_labels(dim, self.labels))

        defect = float(np.max(np.abs(array - array.conj().T)))
        if defect > HERMITIAN_TOL:
            raise ModelError(f"State is not Hermitian (max |rho - rho^H| = {defect:.3e})")
        trace = float(np.real(np.trace(array)))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ModelError(f"State trace is {trace!r}, expected 1")
        lowest = float(np.linalg.eigvalsh(array)[0])
        if lowest < -POSITIVITY_TOL:
            raise PositivityError(lowest)

    @classmethod
    def from_populations(
        cls,
        populations: Mapping[str, float] | Sequence[float],
        labels: Sequence[str] | None = None,
    ) -> "DensityMatrix":
        """Diagonal state; a mapping fills the named levels, the rest are zero."""
        if isinstance(populations, Mapping):
            if labels is None:
                labels = _resolve_labels(len(populations), None)
            diagonal = [float(populations.get(label, 0.0)) for label in labels]
            unknown = set(populations) - set(labels)
            if unknown:
                raise ModelError(f"Unknown levels {sorted(unknown)} for {tuple(labels)}")
        else:
            diagonal = [float(p) for p in populations]
        return cls(np.diag(diagonal), labels)

    @classmethod
    def pure(cls, level: str, labels: Sequence[str]) -> "DensityMatrix":
        labels = tuple(labels)
        return cls.from_populations({level: 1.0}, labels)

    @classmethod
    def maximally_mixed(cls, labels: Sequence[str]) -> "DensityMatrix":
        dim = len(labels)
        return cls(np.eye(dim) / dim, labels)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def index(self, level: str) -> int:
        try:
            return self.labels.index(level)
        except ValueError as e:
            raise ModelError(f"Level {level!r} not in basis {self.labels}") from e

    def population(self, level: str) -> float:
        k = self.index(level)
        return float(np.real(self.data[k, k]))

    def populations(self) -> dict[str, float]:
        diagonal = np.real(np.diag(self.data))
        return {label: float(p) for label, p in zip(self.labels, diagonal)}

    def coherence(self, row: str, col: str) -> complex:
        return complex(self.data[self.index(row), self.index(col)])


def as_array(obj) -> np.ndarray:
    """Return the matrix behind an operator, a state or a plain array."""
    if isinstance(obj, (OperatorMatrix, DensityMatrix)):
        return obj.data
    return np.asarray(obj, dtype=complex)


def transition(row: str, col: str, labels: Sequence[str]) -> OperatorMatrix:
    """Return sigma_{row,col} = |row><col|."""
    labels = tuple(labels)
    if row not in labels or col not in labels:
        raise ModelError(f"Transition ({row},{col}) not in basis {labels}")
    data = np.zeros((len(labels), len(labels)), dtype=complex)
    data[labels.index(row), labels.index(col)] = 1.0
    return OperatorMatrix(data, labels)


def projector(level: str, labels: Sequence[str]) -> OperatorMatrix:
    return transition(level, level, labels)


def hermitian_spectrum(
    operator, tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decompose a Hermitian matrix.

    Args:
        operator: OperatorMatrix, DensityMatrix or square array
        tol: Largest accepted entry of A - A^H

    Returns:
        Ascending real eigenvalues and the unitary whose columns are eigenvectors

    Raises:
        ModelError: If the input is not Hermitian within tol
    """
    matrix = as_array(operator)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ModelError(f"Operator must be square, got shape {matrix.shape}")
    defect = float(np.max(np.abs(matrix - matrix.conj().T)))
    if defect > tol:
        raise ModelError(f"Operator is not Hermitian (max |A - A^H| = {defect:.3e})")
    eigenvalues, eigenvectors = scipy.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    return eigenvalues, eigenvectors


def clamped_spectrum(rho) -> np.ndarray:
    """Eigenvalues of a state with roundoff negatives set to zero."""
    eigenvalues = np.linalg.eigvalsh(as_array(rho))
    if eigenvalues[0] < -POSITIVITY_TOL:
        raise PositivityError(float(eigenvalues[0]))
    return np.clip(eigenvalues, 0.0, None)


def entropy_from_spectrum(eigenvalues: np.ndarray) -> float:
    weights = eigenvalues[eigenvalues > 0.0]
    return float(-np.sum(weights * np.log(weights)))


def von_neumann_entropy(rho) -> float:
    """S = -Tr(rho ln rho) in nats, with 0 ln 0 = 0."""
    return entropy_from_spectrum(clamped_spectrum(rho))


def expectation(rho, operator) -> complex:
    """Return Tr(rho A)."""
    state = as_array(rho)
    matrix = as_array(operator)
    if state.shape != matrix.shape:
        raise ModelError(
            f"Dimension mismatch: state {state.shape} vs operator {matrix.shape}"
        )
    return complex(np.trace(state @ matrix))


def trace_distance(rho, sigma) -> float:
    """Return (1/2) ||rho - sigma||_1."""
    difference = as_array(rho) - as_array(sigma)
    if difference.ndim != 2:
        raise ModelError("Trace distance needs square matrices")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(difference))))
