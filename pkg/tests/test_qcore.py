#!/usr/bin/env python3
"""
Unit tests for the qcore module.
"""

import math

import numpy as np
import pytest
import scipy.linalg

from qotto.errors import ModelError, PositivityError
from qotto.qcore import (
    DensityMatrix,
    OperatorMatrix,
    expectation,
    hermitian_spectrum,
    projector,
    trace_distance,
    transition,
    von_neumann_entropy,
)

LABELS = ("g", "i", "m")


class TestDensityMatrix:
    """Tests for DensityMatrix validation and accessors."""

    def test_from_populations_mapping(self):
        """Test that unnamed levels are filled with zero."""
        rho = DensityMatrix.from_populations({"g": 0.25, "m": 0.75}, LABELS)

        assert rho.population("g") == 0.25
        assert rho.population("i") == 0.0
        assert rho.population("m") == 0.75

    def test_default_labels(self):
        """Test the default basis labels per dimension."""
        assert DensityMatrix(np.eye(3) / 3).labels == ("g", "i", "m")
        assert DensityMatrix(np.eye(4) / 4).labels == ("g", "e", "i", "m")

    def test_unknown_level_in_mapping(self):
        """Test that populations for foreign levels are rejected."""
        with pytest.raises(ModelError, match="Unknown levels"):
            DensityMatrix.from_populations({"g": 0.5, "x": 0.5}, LABELS)

    def test_bad_trace(self):
        """Test that a state with trace != 1 is rejected."""
        with pytest.raises(ModelError, match="trace"):
            DensityMatrix(np.diag([0.5, 0.3, 0.3]), LABELS)

    def test_not_hermitian(self):
        """Test that a non-Hermitian matrix is rejected."""
        data = np.diag([0.5, 0.5, 0.0]).astype(complex)
        data[0, 1] = 0.1
        with pytest.raises(ModelError, match="Hermitian"):
            DensityMatrix(data, LABELS)

    def test_negative_eigenvalue(self):
        """Test that a non-positive state raises PositivityError."""
        with pytest.raises(PositivityError):
            DensityMatrix(np.diag([1.2, -0.2, 0.0]), LABELS)

    def test_dimension_out_of_range(self):
        """Test that only 2-4 level states are accepted."""
        with pytest.raises(ModelError, match="dimension"):
            DensityMatrix(np.eye(5) / 5)

    def test_coherence(self):
        """Test reading an off-diagonal element."""
        data = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        rho = DensityMatrix(data, ("g", "i"))

        assert rho.coherence("g", "i") == pytest.approx(0.5)

    def test_state_is_read_only(self):
        """Test that the stored matrix cannot be modified in place."""
        rho = DensityMatrix.maximally_mixed(LABELS)

        with pytest.raises(ValueError):
            rho.data[0, 0] = 1.0


class TestOperators:
    """Tests for transition operators and spectra."""

    def test_transition_places_one_entry(self):
        """Test sigma_{row,col} = |row><col|."""
        sigma = transition("i", "g", LABELS)

        assert sigma.data[1, 0] == 1.0
        assert np.count_nonzero(sigma.data) == 1

    def test_transition_unknown_level(self):
        """Test that a transition outside the basis is rejected."""
        with pytest.raises(ModelError):
            transition("e", "g", LABELS)

    def test_projector_expectation(self):
        """Test that a projector reads off a population."""
        rho = DensityMatrix.from_populations([0.2, 0.3, 0.5], LABELS)

        assert expectation(rho, projector("m", LABELS)).real == pytest.approx(0.5)

    def test_expectation_dimension_mismatch(self):
        """Test that mismatched dimensions are rejected."""
        rho = DensityMatrix.maximally_mixed(LABELS)

        with pytest.raises(ModelError, match="mismatch"):
            expectation(rho, np.eye(4))

    def test_hermitian_spectrum_ascending(self):
        """Test eigenvalues come back ascending with unitary eigenvectors."""
        matrix = OperatorMatrix(np.array([[1.0, 0.5], [0.5, -1.0]]))
        values, vectors = hermitian_spectrum(matrix)

        assert values[0] < values[1]
        assert values == pytest.approx([-math.sqrt(1.25), math.sqrt(1.25)])
        assert np.allclose(vectors.conj().T @ vectors, np.eye(2))

    def test_hermitian_spectrum_rejects_non_hermitian(self):
        """Test that a non-Hermitian input is rejected."""
        with pytest.raises(ModelError, match="Hermitian"):
            hermitian_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestEntropyAndDistance:
    """Tests for von Neumann entropy and trace distance."""

    def test_pure_state_entropy(self):
        """Test S = 0 for a pure state."""
        assert von_neumann_entropy(DensityMatrix.pure("i", LABELS)) == 0.0

    def test_maximally_mixed_entropy(self):
        """Test S = ln d for the maximally mixed state."""
        rho = DensityMatrix.maximally_mixed(("g", "e", "i", "m"))

        assert von_neumann_entropy(rho) == pytest.approx(math.log(4))

    def test_entropy_unitary_invariance(self):
        """Test S(U rho U^H) = S(rho) for random unitaries."""
        rng = np.random.default_rng(5)
        for dim in (2, 3, 4):
            x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            rho = DensityMatrix(x @ x.conj().T / np.trace(x @ x.conj().T))
            h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            u = scipy.linalg.expm(1j * (h + h.conj().T))

            rotated = DensityMatrix(u @ rho.data @ u.conj().T)

            assert von_neumann_entropy(rotated) == pytest.approx(
                von_neumann_entropy(rho), abs=1e-10
            )

    def test_expectation_linear_in_state(self):
        """Test Tr((a rho + b sigma) A) = a Tr(rho A) + b Tr(sigma A)."""
        operator = np.diag([0.0, 1.0, 1.02]) + 0.3 * (
            transition("g", "m", LABELS).data + transition("m", "g", LABELS).data
        )
        rho = DensityMatrix.from_populations([0.6, 0.3, 0.1], LABELS)
        sigma = DensityMatrix.pure("m", LABELS)

        mixed = DensityMatrix(0.25 * rho.data + 0.75 * sigma.data, LABELS)

        assert expectation(mixed, operator) == pytest.approx(
            0.25 * expectation(rho, operator) + 0.75 * expectation(sigma, operator)
        )

    def test_trace_distance_orthogonal(self):
        """Test distance 1 between orthogonal pure states."""
        a = DensityMatrix.pure("g", LABELS)
        b = DensityMatrix.pure("m", LABELS)

        assert trace_distance(a, b) == pytest.approx(1.0)

    def test_trace_distance_diagonal(self):
        """Test half the L1 distance of the populations for diagonal states."""
        a = DensityMatrix.from_populations([0.5, 0.5, 0.0], LABELS)
        b = DensityMatrix.from_populations([0.2, 0.5, 0.3], LABELS)

        assert trace_distance(a, b) == pytest.approx(0.3)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
