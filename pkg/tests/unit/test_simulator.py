"""Unit tests for the ancilla circuit simulator and shot sampling."""

from __future__ import annotations

import numpy as np
import pytest

from xz24.core.errors import DimensionCapError
from xz24.services.hamiltonian import (
    Hamiltonian,
    dense_matrix,
    parse_hamiltonian,
    random_hamiltonian,
)
from xz24.services.oracle import analytic_signal, diagonalize, overlaps
from xz24.services.simulator import (
    PROPAGATORS,
    CircuitPointResult,
    CircuitSimulator,
    Evaluator,
    direct_expectation_point,
    get_propagator,
    run_circuit_point,
    shot_sample,
    simulate_circuit,
)
from xz24.services.states import ReferenceSpec, prepare_reference


def _matrix_function(h: Hamiltonian, fn) -> np.ndarray:
    energies, vectors = np.linalg.eigh(dense_matrix(h))
    return vectors @ np.diag(fn(energies)) @ vectors.conj().T


def _random_instance(rng: np.random.Generator):
    n_qubits = int(rng.integers(1, 5))
    h = random_hamiltonian(n_qubits, int(rng.integers(1, 9)), rng)
    bits = "".join(str(bit) for bit in rng.integers(0, 2, size=n_qubits))
    return h, ReferenceSpec.basis(bits), float(rng.uniform(0.0, 50.0))


class TestCircuitIdentity:
    def test_readout_matches_analytic_signal(self) -> None:
        rng = np.random.default_rng(2024)
        for _ in range(200):
            h, spec, t = _random_instance(rng)
            table = overlaps(diagonalize(h), prepare_reference(spec, h.n_qubits))
            result = run_circuit_point(h, spec, t)
            assert result.q == pytest.approx(analytic_signal(table, t), abs=1e-10)

    def test_intermediate_states(self) -> None:
        rng = np.random.default_rng(7)
        for _ in range(200):
            h, spec, t = _random_instance(rng)
            psi = prepare_reference(spec, h.n_qubits).amplitudes
            trace = simulate_circuit(h, spec, t)

            t1 = trace.t1.reshape(2, -1)
            np.testing.assert_allclose(t1[0], (1 + 1j) / 2 * psi, atol=1e-12)
            np.testing.assert_allclose(t1[1], (1 - 1j) / 2 * psi, atol=1e-12)

            forward = _matrix_function(h, lambda e: np.exp(-0.5j * e * t)) @ psi
            backward = _matrix_function(h, lambda e: np.exp(0.5j * e * t)) @ psi
            t2 = trace.t2.reshape(2, -1)
            np.testing.assert_allclose(t2[0], (1 + 1j) / 2 * forward, atol=1e-10)
            np.testing.assert_allclose(t2[1], (1 - 1j) / 2 * backward, atol=1e-10)

            t3 = trace.t3.reshape(2, -1)
            np.testing.assert_allclose(
                t3[0], _matrix_function(h, lambda e: np.sin(e * t / 2)) @ psi, atol=1e-10
            )
            np.testing.assert_allclose(
                t3[1], _matrix_function(h, lambda e: np.cos(e * t / 2)) @ psi, atol=1e-10
            )


class TestCircuitSimulator:
    def test_probabilities_sum_to_one(self, fixture_hamiltonian: Hamiltonian) -> None:
        simulator = CircuitSimulator(fixture_hamiltonian, ReferenceSpec.basis("0"))
        for t in (0.0, 0.7, 13.0, 250.0):
            result = simulator.run(t)
            assert result.p0 + result.p1 == pytest.approx(1.0, abs=1e-12)
            assert result.q == pytest.approx(result.p1 - result.p0)

    def test_origin_reads_one(self, fixture_hamiltonian: Hamiltonian) -> None:
        assert run_circuit_point(fixture_hamiltonian, ReferenceSpec.basis("0"), 0.0).q == (
            pytest.approx(1.0, abs=1e-12)
        )

    def test_direct_matches_circuit(self) -> None:
        h = random_hamiltonian(3, 6, np.random.default_rng(9))
        spec = ReferenceSpec.basis("101")
        for t in np.linspace(0.0, 20.0, 9):
            circuit = run_circuit_point(h, spec, t).q
            assert direct_expectation_point(h, spec, t) == pytest.approx(circuit, abs=1e-10)

    def test_direct_evaluator_point(self, fixture_hamiltonian: Hamiltonian) -> None:
        simulator = CircuitSimulator(fixture_hamiltonian, ReferenceSpec.basis("0"))
        result = simulator.point(2.0, Evaluator.DIRECT)
        assert result.p1 == pytest.approx((1 + result.q) / 2)

    def test_single_eigenstate_gives_pure_cosine(self) -> None:
        h = parse_hamiltonian("qubits 2\n0.75 Z0\n-0.5 Z1\n")
        result = run_circuit_point(h, ReferenceSpec.basis("01"), 3.0)
        assert result.q == pytest.approx(np.cos(1.25 * 3.0), abs=1e-12)

    def test_non_finite_time_rejected(self, fixture_hamiltonian: Hamiltonian) -> None:
        with pytest.raises(ValueError):
            run_circuit_point(fixture_hamiltonian, ReferenceSpec.basis("0"), float("nan"))

    def test_dimension_cap(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("XZ24_MAX_QUBITS", "2")
        h = parse_hamiltonian("qubits 3\n1.0 Z0\n")
        with pytest.raises(DimensionCapError):
            CircuitSimulator(h, ReferenceSpec.basis("000"))


class TestShotSample:
    def test_statistics(self) -> None:
        exact = CircuitPointResult(t=0.0, p0=0.5, p1=0.5, q=0.0)
        estimates = np.array([shot_sample(exact, 10_000, seed).q for seed in range(100)])
        assert estimates.std(ddof=1) == pytest.approx(0.01, rel=0.3)
        assert abs(estimates.mean()) < 0.01

    def test_same_seed_same_result(self) -> None:
        exact = CircuitPointResult(t=1.0, p0=0.3, p1=0.7, q=0.4)
        assert shot_sample(exact, 500, (3, 17)) == shot_sample(exact, 500, (3, 17))

    def test_records_shots(self) -> None:
        exact = CircuitPointResult(t=1.0, p0=0.3, p1=0.7, q=0.4)
        sampled = shot_sample(exact, 64, 1)
        assert sampled.shots_used == 64
        assert sampled.p0 + sampled.p1 == pytest.approx(1.0)

    def test_rejects_zero_shots(self) -> None:
        exact = CircuitPointResult(t=0.0, p0=0.0, p1=1.0, q=1.0)
        with pytest.raises(ValueError):
            shot_sample(exact, 0, 1)


class TestSignalSymmetry:
    def test_even_in_time(self) -> None:
        rng = np.random.default_rng(31)
        for _ in range(100):
            h, spec, t = _random_instance(rng)
            simulator = CircuitSimulator(h, spec)
            assert simulator.run(-t).q == pytest.approx(simulator.run(t).q, abs=1e-10)
            assert simulator.direct(-t) == pytest.approx(simulator.direct(t), abs=1e-10)


class TestPropagatorCache:
    @pytest.fixture(autouse=True)
    def empty_cache(self):
        PROPAGATORS.clear()
        yield
        PROPAGATORS.clear()

    def test_default_keeps_two(self) -> None:
        hamiltonians = [parse_hamiltonian(f"{c} Z0\n0.5 X0\n") for c in (1.0, 2.0, 3.0)]
        for h in hamiltonians:
            get_propagator(h)
        assert len(PROPAGATORS) == 2
        assert hamiltonians[0] not in PROPAGATORS
        assert hamiltonians[2] in PROPAGATORS

    def test_hit_refreshes_recency(self) -> None:
        a, b, c = (parse_hamiltonian(f"{coef} Z0\n") for coef in (1.0, 2.0, 3.0))
        first = get_propagator(a)
        get_propagator(b)
        assert get_propagator(a) is first
        get_propagator(c)
        assert a in PROPAGATORS
        assert b not in PROPAGATORS

    def test_capacity_from_settings(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("XZ24_PROPAGATOR_CACHE", "0")
        h = parse_hamiltonian("1.0 Z0\n")
        assert get_propagator(h) is not get_propagator(h)
        assert len(PROPAGATORS) == 0

    def test_cached_propagator_still_exact(self, fixture_hamiltonian: Hamiltonian) -> None:
        spec = ReferenceSpec.basis("0")
        first = run_circuit_point(fixture_hamiltonian, spec, 4.0).q
        assert fixture_hamiltonian in PROPAGATORS
        assert run_circuit_point(fixture_hamiltonian, spec, 4.0).q == first
