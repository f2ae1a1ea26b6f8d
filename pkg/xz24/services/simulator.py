"""Statevector execution of the ancilla-controlled time-evolution circuit.

Register layout: the ancilla is the most significant qubit, so a joint
state of ``n + 1`` qubits reshapes to ``(2, 2**n)`` with row 0 holding the
ancilla-|0> block and row 1 the ancilla-|1> block.

Circuit (ancilla gates read left to right)::

    H' -> S -> H'  |  c0: exp(-iHt/2), c1: exp(+iHt/2)  |  H' -> S -> H'  |  measure q0

The evolution operators are exact, built from a cached eigendecomposition.
"""

from __future__ import annotations

import logging
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from ..core.config import get_settings
from .hamiltonian import Hamiltonian, check_dimension
from .oracle import EigenDecomposition, diagonalize
from .states import ReferenceSpec, StateVector, prepare_reference

logger = logging.getLogger(__name__)

HADAMARD = (math.sqrt(2) / 2) * np.array([[1, 1], [1, -1]], dtype=complex)
PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)
ANCILLA_SEQUENCE = (HADAMARD, PHASE, HADAMARD)

NORM_DRIFT_TOLERANCE = 1e-10


class Evaluator(str, Enum):
    CIRCUIT = "circuit"
    DIRECT = "direct"


@dataclass(frozen=True, eq=False)
class Propagator:
    """exp(-iHt) applied as V diag(exp(-iEt)) V^dagger without forming the matrix."""

    decomposition: EigenDecomposition

    def evolve(self, vector: np.ndarray, t: float) -> np.ndarray:
        vectors = self.decomposition.eigenvectors
        phases = np.exp(-1j * self.decomposition.energies * t)
        return vectors @ (phases * (vectors.conj().T @ vector))


class PropagatorCache:
    """Least-recently-used propagators keyed by Hamiltonian.

    A 14-qubit eigenbasis is several GiB, so capacity comes from
    ``Settings.propagator_cache`` (two covers H and H + s0 of a signed run).
    Capacity 0 disables caching.
    """

    def __init__(self) -> None:
        self._entries: "OrderedDict[Hamiltonian, Propagator]" = OrderedDict()
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, h: Hamiltonian) -> bool:
        return h in self._entries

    def get(self, h: Hamiltonian, capacity: int) -> Propagator:
        with self._lock:
            cached = self._entries.get(h)
            if cached is not None:
                self._entries.move_to_end(h)
                return cached

            propagator = Propagator(diagonalize(h))
            if capacity > 0:
                self._entries[h] = propagator
                while len(self._entries) > capacity:
                    self._entries.popitem(last=False)
            logger.debug("Diagonalized %d-qubit Hamiltonian (%d cached)", h.n_qubits, len(self))
            return propagator

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


PROPAGATORS = PropagatorCache()


def get_propagator(h: Hamiltonian) -> Propagator:
    """One diagonalization per Hamiltonian, shared by every time point."""

    check_dimension(h.n_qubits)
    return PROPAGATORS.get(h, get_settings().propagator_cache)


@dataclass(frozen=True, eq=False)
class CircuitTrace:
    """Joint (ancilla + target) states at the three taps of the circuit."""

    t: float
    t1: np.ndarray
    t2: np.ndarray
    t3: np.ndarray


@dataclass(frozen=True)
class CircuitPointResult:
    t: float
    p0: float
    p1: float
    q: float
    shots_used: Optional[int] = None


def _check_norm(state: np.ndarray, stage: str) -> None:
    norm = float(np.vdot(state, state).real)
    if abs(norm - 1.0) > NORM_DRIFT_TOLERANCE:
        raise RuntimeError(f"statevector norm drifted to {norm!r} after {stage}")


def _apply_ancilla_gate(state: np.ndarray, gate: np.ndarray) -> np.ndarray:
    blocks = state.reshape(2, -1)
    return (gate @ blocks).reshape(-1)


def _ancilla_sandwich(state: np.ndarray, label: str) -> np.ndarray:
    for position, gate in enumerate(ANCILLA_SEQUENCE):
        state = _apply_ancilla_gate(state, gate)
        _check_norm(state, f"{label} gate {position}")
    return state


def _require_finite(t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"Evolution time must be finite, got {t!r}")
    return t


class CircuitSimulator:
    """Evaluates Q(t) for one (Hamiltonian, reference) pair.

    Holds the prepared reference and the cached propagator; safe to call from
    several threads because every evaluation allocates its own statevector.
    """

    def __init__(self, h: Hamiltonian, spec: ReferenceSpec) -> None:
        check_dimension(h.n_qubits)
        self.hamiltonian = h
        self.reference: StateVector = prepare_reference(spec, h.n_qubits)
        self.propagator = get_propagator(h)

    def trace(self, t: float) -> CircuitTrace:
        t = _require_finite(t)
        psi = self.reference.amplitudes
        state = np.concatenate([psi, np.zeros_like(psi)])

        t1 = _ancilla_sandwich(state, "first sandwich")

        blocks = t1.reshape(2, -1)
        t2 = np.concatenate(
            [
                self.propagator.evolve(blocks[0], t / 2),
                self.propagator.evolve(blocks[1], -t / 2),
            ]
        )
        _check_norm(t2, "controlled evolution")

        t3 = _ancilla_sandwich(t2, "second sandwich")
        return CircuitTrace(t=t, t1=t1, t2=t2, t3=t3)

    def run(self, t: float) -> CircuitPointResult:
        """Measurement probabilities of the ancilla after the full circuit."""

        final = self.trace(t).t3.reshape(2, -1)
        p0 = float(np.vdot(final[0], final[0]).real)
        p1 = float(np.vdot(final[1], final[1]).real)
        return CircuitPointResult(t=float(t), p0=p0, p1=p1, q=p1 - p0)

    def direct(self, t: float) -> float:
        """Re <psi|exp(-iHt)|psi>, no ancilla register."""

        t = _require_finite(t)
        psi = self.reference.amplitudes
        return float(np.vdot(psi, self.propagator.evolve(psi, t)).real)

    def point(self, t: float, evaluator: Evaluator = Evaluator.CIRCUIT) -> CircuitPointResult:
        if evaluator is Evaluator.CIRCUIT:
            return self.run(t)
        q = self.direct(t)
        return CircuitPointResult(t=float(t), p0=(1.0 - q) / 2, p1=(1.0 + q) / 2, q=q)


def simulate_circuit(h: Hamiltonian, spec: ReferenceSpec, t: float) -> CircuitTrace:
    return CircuitSimulator(h, spec).trace(t)


def run_circuit_point(h: Hamiltonian, spec: ReferenceSpec, t: float) -> CircuitPointResult:
    """Simulate the full circuit at time ``t`` and read the ancilla probabilities."""

    return CircuitSimulator(h, spec).run(t)


def direct_expectation_point(h: Hamiltonian, spec: ReferenceSpec, t: float) -> float:
    """Q(t) straight from the target register; agrees with the circuit's q."""

    return CircuitSimulator(h, spec).direct(t)


def shot_sample(
    exact: CircuitPointResult, shots: int, rng_seed: Union[int, Sequence[int]]
) -> CircuitPointResult:
    """Replace exact probabilities by the frequencies of ``shots`` ancilla readouts."""

    if shots < 1:
        raise ValueError(f"shots must be at least 1, got {shots}")

    rng = np.random.default_rng(rng_seed)
    p1 = min(max(exact.p1, 0.0), 1.0)
    successes = int(rng.binomial(shots, p1))
    p1_hat = successes / shots
    return CircuitPointResult(
        t=exact.t, p0=1.0 - p1_hat, p1=p1_hat, q=2.0 * p1_hat - 1.0, shots_used=shots
    )
