"""Unit tests for xz24.services.hamiltonian: parsing, canonical form, dense matrices."""

from __future__ import annotations

import numpy as np
import pytest

from xz24.core.errors import DimensionCapError, HamiltonianParseError
from xz24.services.hamiltonian import (
    Hamiltonian,
    PauliAxis,
    PauliTerm,
    basis_expectation,
    check_dimension,
    dense_matrix,
    l1_norm_bound,
    offset,
    parse_hamiltonian,
    random_hamiltonian,
    serialize_hamiltonian,
)


class TestParseHamiltonian:
    def test_fixture_terms(self, fixture_hamiltonian: Hamiltonian) -> None:
        assert fixture_hamiltonian.n_qubits == 1
        assert fixture_hamiltonian.n_terms == 3
        assert fixture_hamiltonian.identity_coefficient == pytest.approx(0.2)

    def test_qubit_count_from_largest_index(self) -> None:
        h = parse_hamiltonian("-0.4804 Z0 Z3\n0.1 X1\n")
        assert h.n_qubits == 4

    def test_header_sets_qubit_count(self) -> None:
        h = parse_hamiltonian("qubits 3\n1.0 Z0\n")
        assert h.n_qubits == 3

    def test_duplicate_strings_merge(self) -> None:
        h = parse_hamiltonian("0.25 Z0 X1\n0.5 X1 Z0\n")
        assert h.n_terms == 1
        assert h.terms[0].coefficient == pytest.approx(0.75)

    def test_cancelling_terms_are_dropped(self) -> None:
        h = parse_hamiltonian("1.0 Z0\n-1.0 Z0\n0.5 X0\n")
        assert [term.label for term in h.terms] == ["X0"]

    def test_lowercase_axes_and_comments(self) -> None:
        h = parse_hamiltonian("# header comment\n0.5 x0 y1  # trailing\n\n")
        assert h.terms[0].factors == ((0, PauliAxis.X), (1, PauliAxis.Y))

    def test_error_reports_line_number(self) -> None:
        with pytest.raises(HamiltonianParseError) as excinfo:
            parse_hamiltonian("1.0 Z0\n0.5 Q1\n")
        assert excinfo.value.line_number == 2
        assert "line 2" in str(excinfo.value)

    @pytest.mark.parametrize(
        "text",
        [
            "abc Z0\n",
            "1.0 Z0 Z0\n",
            "1.0 Z-1\n",
            "nan Z0\n",
            "1.0 Z\n",
            "qubits 1\n1.0 Z2\n",
            "qubits 2\nqubits 2\n",
            "",
            "# only comments\n",
        ],
    )
    def test_rejects_malformed_input(self, text: str) -> None:
        with pytest.raises(HamiltonianParseError):
            parse_hamiltonian(text)

    def test_serialize_round_trip(self) -> None:
        rng = np.random.default_rng(11)
        h = random_hamiltonian(3, 6, rng)
        assert parse_hamiltonian(serialize_hamiltonian(h)) == h


class TestPauliTerm:
    def test_rejects_unsorted_factors(self) -> None:
        with pytest.raises(ValueError):
            PauliTerm(1.0, ((1, PauliAxis.Z), (0, PauliAxis.X)))

    def test_rejects_non_finite_coefficient(self) -> None:
        with pytest.raises(ValueError):
            PauliTerm(float("inf"), ())

    def test_identity_label(self) -> None:
        assert PauliTerm(0.3).is_identity
        assert PauliTerm(0.3).label == ""


class TestDenseMatrix:
    def test_fixture_matrix(self, fixture_hamiltonian: Hamiltonian) -> None:
        expected = np.array([[1.2, 0.5], [0.5, -0.8]])
        np.testing.assert_allclose(dense_matrix(fixture_hamiltonian), expected, atol=1e-15)

    def test_qubit_zero_is_most_significant(self) -> None:
        h = parse_hamiltonian("qubits 2\n1.0 Z0\n")
        np.testing.assert_allclose(np.diag(dense_matrix(h)).real, [1, 1, -1, -1])

    def test_pauli_y_phase(self) -> None:
        h = parse_hamiltonian("1.0 Y0\n")
        np.testing.assert_allclose(dense_matrix(h), [[0, -1j], [1j, 0]])

    def test_matches_kronecker_products(self) -> None:
        single = {
            PauliAxis.X: np.array([[0, 1], [1, 0]], dtype=complex),
            PauliAxis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
            PauliAxis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
        }
        rng = np.random.default_rng(3)
        h = random_hamiltonian(3, 8, rng)

        expected = np.zeros((8, 8), dtype=complex)
        for term in h.terms:
            axes = dict(term.factors)
            product = np.eye(1, dtype=complex)
            for qubit in range(h.n_qubits):
                factor = single[axes[qubit]] if qubit in axes else np.eye(2)
                product = np.kron(product, factor)
            expected += term.coefficient * product

        np.testing.assert_allclose(dense_matrix(h), expected, atol=1e-12)

    def test_is_hermitian(self) -> None:
        h = random_hamiltonian(4, 8, np.random.default_rng(5))
        matrix = dense_matrix(h)
        np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-14)

    def test_dimension_cap(self) -> None:
        h = parse_hamiltonian("qubits 3\n1.0 Z0\n")
        with pytest.raises(DimensionCapError):
            dense_matrix(h, max_qubits=2)

    def test_cap_comes_from_settings(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("XZ24_MAX_QUBITS", "2")
        with pytest.raises(DimensionCapError):
            check_dimension(3)
        check_dimension(2)


class TestBounds:
    def test_l1_bound(self, fixture_hamiltonian: Hamiltonian) -> None:
        assert l1_norm_bound(fixture_hamiltonian) == pytest.approx(1.7)

    def test_l1_bound_dominates_spectrum(self) -> None:
        rng = np.random.default_rng(8)
        for _ in range(20):
            h = random_hamiltonian(3, 6, rng)
            radius = np.max(np.abs(np.linalg.eigvalsh(dense_matrix(h))))
            assert radius <= l1_norm_bound(h) + 1e-12

    def test_basis_expectation(self) -> None:
        h = parse_hamiltonian("0.5\n1.0 Z0\n-0.25 Z0 Z1\n3.0 X1\n")
        assert basis_expectation(h, "00") == pytest.approx(0.5 + 1.0 - 0.25)
        assert basis_expectation(h, "10") == pytest.approx(0.5 - 1.0 + 0.25)

    def test_basis_expectation_rejects_wrong_length(self, fixture_hamiltonian: Hamiltonian) -> None:
        with pytest.raises(ValueError):
            basis_expectation(fixture_hamiltonian, "01")


class TestOffset:
    def test_adds_to_identity(self, fixture_hamiltonian: Hamiltonian) -> None:
        shifted = offset(fixture_hamiltonian, 0.05)
        assert shifted.identity_coefficient == pytest.approx(0.25)
        assert shifted.n_terms == fixture_hamiltonian.n_terms

    def test_zero_offset_is_identity(self, fixture_hamiltonian: Hamiltonian) -> None:
        assert offset(fixture_hamiltonian, 0.0) is fixture_hamiltonian

    def test_shifts_every_eigenvalue(self) -> None:
        h = random_hamiltonian(2, 5, np.random.default_rng(2))
        base = np.linalg.eigvalsh(dense_matrix(h))
        shifted = np.linalg.eigvalsh(dense_matrix(offset(h, 0.3)))
        np.testing.assert_allclose(shifted, base + 0.3, atol=1e-12)
