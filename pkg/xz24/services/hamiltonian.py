"""Pauli-string Hamiltonians: parsing, canonical form, and the dense-matrix view.

A Hamiltonian is a real-weighted sum of Pauli strings

    H = c_1 P_1 + c_2 P_2 + ... + c_m P_m

stored as canonical terms: factors sorted by qubit index, duplicate strings
merged, zero terms dropped. Qubit 0 is the most significant bit of a
basis-state index, so ``Z0`` on two qubits is ``diag(1, 1, -1, -1)``.

File grammar (one term per line)::

    # comment
    qubits 4
    -0.4804 Z0 Z3
    0.2            <- identity term
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from ..core.config import get_settings
from ..core.errors import DimensionCapError, HamiltonianParseError

logger = logging.getLogger(__name__)

_ZERO_TOLERANCE = 1e-15
_FACTOR_RE = re.compile(r"^([A-Za-z])(-?\d+)$")
_HEADER_RE = re.compile(r"^qubits\s+(\S+)$", re.IGNORECASE)


class PauliAxis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


Factor = Tuple[int, PauliAxis]


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string; an empty factor tuple is the identity."""

    coefficient: float
    factors: Tuple[Factor, ...] = ()

    def __post_init__(self) -> None:
        if not math.isfinite(self.coefficient):
            raise ValueError(f"Coefficient must be finite, got {self.coefficient!r}")
        previous = -1
        for qubit, axis in self.factors:
            if qubit < 0:
                raise ValueError(f"Negative qubit index {qubit}")
            if qubit <= previous:
                raise ValueError("Factor qubit indices must be strictly increasing")
            if not isinstance(axis, PauliAxis):
                raise TypeError(f"Factor axis must be a PauliAxis, got {axis!r}")
            previous = qubit

    @property
    def is_identity(self) -> bool:
        return not self.factors

    @property
    def is_diagonal(self) -> bool:
        """True when the term only holds Z factors (or none)."""
        return all(axis is PauliAxis.Z for _, axis in self.factors)

    @property
    def label(self) -> str:
        return " ".join(f"{axis.value}{qubit}" for qubit, axis in self.factors)

    def sort_key(self) -> tuple:
        return (len(self.factors), tuple((q, a.value) for q, a in self.factors))


@dataclass(frozen=True)
class Hamiltonian:
    """Immutable canonical Pauli sum on ``n_qubits`` target qubits."""

    n_qubits: int
    terms: Tuple[PauliTerm, ...]

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        seen = set()
        for term in self.terms:
            if term.factors in seen:
                raise ValueError(f"Duplicate Pauli string '{term.label or 'I'}'")
            seen.add(term.factors)
            for qubit, _ in term.factors:
                if qubit >= self.n_qubits:
                    raise ValueError(
                        f"Qubit index {qubit} out of range for {self.n_qubits} qubits"
                    )

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[PauliTerm]) -> "Hamiltonian":
        """Merge identical strings, drop zero weights, and sort into canonical order."""

        merged: Dict[Tuple[Factor, ...], float] = {}
        for term in terms:
            merged[term.factors] = merged.get(term.factors, 0.0) + term.coefficient

        canonical = [
            PauliTerm(coefficient, factors)
            for factors, coefficient in merged.items()
            if abs(coefficient) > _ZERO_TOLERANCE
        ]
        canonical.sort(key=PauliTerm.sort_key)
        return cls(n_qubits=n_qubits, terms=tuple(canonical))

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def identity_coefficient(self) -> float:
        for term in self.terms:
            if term.is_identity:
                return term.coefficient
        return 0.0

    def __str__(self) -> str:
        lines = [f"Hamiltonian on {self.n_qubits} qubits ({self.n_terms} terms):"]
        for term in self.terms:
            lines.append(f"  {term.coefficient:+12.8f}  {term.label or 'I'}")
        return "\n".join(lines)


def _parse_factor(token: str, line_number: int) -> Factor:
    match = _FACTOR_RE.match(token)
    if not match:
        raise HamiltonianParseError(f"malformed Pauli factor '{token}'", line_number)
    letter, index = match.group(1).upper(), int(match.group(2))
    if letter not in PauliAxis.__members__:
        raise HamiltonianParseError(f"unknown Pauli axis '{match.group(1)}'", line_number)
    if index < 0:
        raise HamiltonianParseError(f"negative qubit index in '{token}'", line_number)
    return index, PauliAxis(letter)


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse the line-oriented term format into a canonical Hamiltonian."""

    header_qubits: Optional[int] = None
    raw_terms = []
    max_index = -1

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue

        header = _HEADER_RE.match(line)
        if header:
            if header_qubits is not None:
                raise HamiltonianParseError("duplicate 'qubits' header", line_number)
            try:
                header_qubits = int(header.group(1))
            except ValueError:
                raise HamiltonianParseError(
                    f"qubit count '{header.group(1)}' is not an integer", line_number
                ) from None
            if header_qubits < 1:
                raise HamiltonianParseError("qubit count must be positive", line_number)
            continue

        tokens = line.split()
        try:
            coefficient = float(tokens[0])
        except ValueError:
            raise HamiltonianParseError(
                f"non-numeric coefficient '{tokens[0]}'", line_number
            ) from None
        if not math.isfinite(coefficient):
            raise HamiltonianParseError(f"coefficient '{tokens[0]}' is not finite", line_number)

        factors: Dict[int, PauliAxis] = {}
        for token in tokens[1:]:
            qubit, axis = _parse_factor(token, line_number)
            if qubit in factors:
                raise HamiltonianParseError(
                    f"qubit {qubit} appears more than once in one term", line_number
                )
            factors[qubit] = axis
            max_index = max(max_index, qubit)

        raw_terms.append((line_number, PauliTerm(coefficient, tuple(sorted(factors.items())))))

    if header_qubits is None and not raw_terms:
        raise HamiltonianParseError("no terms found")

    n_qubits = header_qubits if header_qubits is not None else max(1, max_index + 1)
    for line_number, term in raw_terms:
        if term.factors and term.factors[-1][0] >= n_qubits:
            raise HamiltonianParseError(
                f"qubit index {term.factors[-1][0]} exceeds header count {n_qubits}",
                line_number,
            )

    hamiltonian = Hamiltonian.from_terms(n_qubits, (term for _, term in raw_terms))
    logger.debug(
        "Parsed Hamiltonian: %d qubits, %d terms (%d lines)",
        hamiltonian.n_qubits,
        hamiltonian.n_terms,
        len(raw_terms),
    )
    return hamiltonian


def serialize_hamiltonian(h: Hamiltonian) -> str:
    """Inverse of parse_hamiltonian, with repr-precision coefficients."""

    lines = [f"qubits {h.n_qubits}"]
    for term in h.terms:
        lines.append(f"{term.coefficient!r} {term.label}".rstrip())
    return "\n".join(lines) + "\n"


def check_dimension(n_qubits: int, max_qubits: Optional[int] = None) -> None:
    cap = get_settings().max_qubits if max_qubits is None else max_qubits
    if n_qubits > cap:
        raise DimensionCapError(
            f"{n_qubits} qubits exceeds the dense-matrix cap of {cap} qubits"
        )


def _term_masks(term: PauliTerm, n_qubits: int) -> Tuple[int, int, int]:
    """Symplectic form of a term: (x_mask, z_mask, number of Y factors)."""

    x_mask = z_mask = n_y = 0
    for qubit, axis in term.factors:
        bit = 1 << (n_qubits - 1 - qubit)
        if axis is not PauliAxis.Z:
            x_mask |= bit
        if axis is not PauliAxis.X:
            z_mask |= bit
        if axis is PauliAxis.Y:
            n_y += 1
    return x_mask, z_mask, n_y


def _parity(values: np.ndarray) -> np.ndarray:
    folded = values.copy()
    for shift in (1, 2, 4, 8, 16):
        folded ^= folded >> shift
    return folded & 1


def dense_matrix(h: Hamiltonian, max_qubits: Optional[int] = None) -> np.ndarray:
    """Build the full 2^n x 2^n Hermitian matrix.

    Each Pauli string maps basis state ``b`` to ``b ^ x_mask`` with phase
    ``i**n_y * (-1)**popcount(b & z_mask)``, so the matrix is filled term by
    term without forming Kronecker products.
    """

    check_dimension(h.n_qubits, max_qubits)
    dim = 1 << h.n_qubits
    columns = np.arange(dim, dtype=np.int64)
    matrix = np.zeros((dim, dim), dtype=complex)

    for term in h.terms:
        x_mask, z_mask, n_y = _term_masks(term, h.n_qubits)
        signs = 1.0 - 2.0 * _parity(columns & z_mask)
        matrix[columns ^ x_mask, columns] += term.coefficient * (1j**n_y) * signs

    return matrix


def l1_norm_bound(h: Hamiltonian) -> float:
    """Sum of |coefficients|; never below the spectral radius."""

    return float(sum(abs(term.coefficient) for term in h.terms))


def offset(h: Hamiltonian, s0: float) -> Hamiltonian:
    """Return H + s0 * I."""

    if not math.isfinite(s0):
        raise ValueError(f"Offset must be finite, got {s0!r}")
    if s0 == 0:
        return h
    return Hamiltonian.from_terms(h.n_qubits, (*h.terms, PauliTerm(s0)))


def basis_expectation(h: Hamiltonian, bits: str) -> float:
    """<bits|H|bits>; terms holding X or Y factors vanish on a basis state."""

    if len(bits) != h.n_qubits:
        raise ValueError(f"Bitstring length {len(bits)} does not match {h.n_qubits} qubits")
    if any(bit not in "01" for bit in bits):
        raise ValueError(f"Bitstring '{bits}' may only contain 0 and 1")

    total = 0.0
    for term in h.terms:
        if not term.is_diagonal:
            continue
        flips = sum(bits[qubit] == "1" for qubit, _ in term.factors)
        total += term.coefficient * (-1.0 if flips % 2 else 1.0)
    return total


def random_hamiltonian(
    n_qubits: int,
    n_terms: int,
    rng: np.random.Generator,
    scale: float = 2.0,
) -> Hamiltonian:
    """Seeded random Pauli sum; identical strings drawn twice are merged."""

    axes = (None, PauliAxis.X, PauliAxis.Y, PauliAxis.Z)
    terms = []
    for _ in range(n_terms):
        picks = rng.integers(0, 4, size=n_qubits)
        factors = tuple((q, axes[p]) for q, p in enumerate(picks) if p)
        terms.append(PauliTerm(float(rng.uniform(-scale, scale)), factors))
    return Hamiltonian.from_terms(n_qubits, terms)
