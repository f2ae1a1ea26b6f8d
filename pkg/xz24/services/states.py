"""Reference states for the target register."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

import numpy as np

from ..core.errors import ReferenceStateError

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-normalized amplitudes over ``n_qubits`` (qubit 0 = most significant bit)."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"Expected {1 << self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"State is not normalized (norm^2 = {norm:.3e})")


@dataclass(frozen=True)
class ReferenceSpec:
    """A basis bitstring or a weighted superposition of bitstrings.

    ``components`` keeps the (bitstring, real amplitude) pairs as given;
    duplicates are merged and the sum is normalized only when a state is
    prepared.
    """

    components: Tuple[Tuple[str, float], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ReferenceStateError("reference spec is empty")
        lengths = {len(bits) for bits, _ in self.components}
        if len(lengths) != 1:
            raise ReferenceStateError(f"bitstrings differ in length: {sorted(lengths)}")
        for bits, amplitude in self.components:
            if not bits or any(bit not in "01" for bit in bits):
                raise ReferenceStateError(f"invalid bitstring '{bits}'")
            if not math.isfinite(amplitude):
                raise ReferenceStateError(f"amplitude for '{bits}' is not finite")

    @classmethod
    def basis(cls, bits: str) -> "ReferenceSpec":
        return cls(((bits, 1.0),))

    @classmethod
    def weighted(cls, pairs: Iterable[Tuple[str, float]]) -> "ReferenceSpec":
        return cls(tuple((bits, float(amplitude)) for bits, amplitude in pairs))

    @classmethod
    def parse(cls, text: str) -> "ReferenceSpec":
        """Read ``--ref`` syntax: a bitstring, or ``@path`` to ``bits amplitude`` lines."""

        text = text.strip()
        if text.startswith("@"):
            return cls.parse_lines(Path(text[1:]).read_text(encoding="utf-8"))
        return cls.basis(text)

    @classmethod
    def parse_lines(cls, text: str) -> "ReferenceSpec":
        pairs = []
        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) > 2:
                raise ReferenceStateError(f"line {line_number}: expected 'bits [amplitude]'")
            try:
                amplitude = float(tokens[1]) if len(tokens) == 2 else 1.0
            except ValueError:
                raise ReferenceStateError(
                    f"line {line_number}: non-numeric amplitude '{tokens[1]}'"
                ) from None
            pairs.append((tokens[0], amplitude))
        return cls.weighted(pairs)

    @property
    def n_qubits(self) -> int:
        return len(self.components[0][0])

    @property
    def is_basis(self) -> bool:
        return len({bits for bits, _ in self.components}) == 1

    @property
    def bitstring(self) -> str:
        """Basis bitstring; only meaningful when ``is_basis``."""
        return self.components[0][0]

    def describe(self) -> str:
        if self.is_basis:
            return self.bitstring
        return " + ".join(f"{amp:g}|{bits}>" for bits, amp in self.components)


def prepare_reference(spec: ReferenceSpec, n_qubits: int) -> StateVector:
    """Normalized target-register state for ``spec``."""

    if spec.n_qubits != n_qubits:
        raise ReferenceStateError(
            f"reference has {spec.n_qubits} bits but the Hamiltonian acts on {n_qubits} qubits"
        )

    merged: Dict[int, float] = {}
    for bits, amplitude in spec.components:
        index = int(bits, 2)
        merged[index] = merged.get(index, 0.0) + amplitude

    amplitudes = np.zeros(1 << n_qubits, dtype=complex)
    for index, amplitude in merged.items():
        amplitudes[index] = amplitude

    norm = float(np.linalg.norm(amplitudes))
    if norm == 0.0:
        raise ReferenceStateError("reference amplitudes cancel to a zero-norm state")
    return StateVector(n_qubits=n_qubits, amplitudes=amplitudes / norm)


def excited_references(bits: str, max_order: int = 2) -> List[ReferenceSpec]:
    """``bits`` followed by every single (and double) excitation of it.

    An excitation of order m moves m occupied qubits (1) to m empty ones (0),
    so the number of ones is conserved. Singles come before doubles; within
    an order the moves are listed in lexicographic (holes, particles) order.
    """

    base = ReferenceSpec.basis(bits)
    if max_order not in (0, 1, 2):
        raise ReferenceStateError(f"excitation order must be 0, 1 or 2, got {max_order}")

    occupied = [i for i, bit in enumerate(bits) if bit == "1"]
    empty = [i for i, bit in enumerate(bits) if bit == "0"]
    references = [base]
    for order in range(1, max_order + 1):
        for holes in combinations(occupied, order):
            for particles in combinations(empty, order):
                flipped = list(bits)
                for index in (*holes, *particles):
                    flipped[index] = "0" if flipped[index] == "1" else "1"
                references.append(ReferenceSpec.basis("".join(flipped)))
    logger.info("%d reference states from %s up to order %d", len(references), bits, max_order)
    return references
