"""Exact reference results from dense diagonalization."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple, Union

import numpy as np
import scipy.linalg

from .hamiltonian import Hamiltonian, dense_matrix
from .states import StateVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues with eigenvectors as matching columns."""

    energies: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.energies.shape[0])

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])


class OverlapEntry(NamedTuple):
    energy: float
    weight: float


class Level(NamedTuple):
    """Energies merged into one spectral line, with their summed weight."""

    energy: float
    weight: float
    members: Tuple[float, ...]


@dataclass(frozen=True)
class OverlapTable:
    """|<Psi_i|psi_ref>|^2 for every eigenvector, zero weights included."""

    entries: Tuple[OverlapEntry, ...]

    @property
    def energies(self) -> np.ndarray:
        return np.array([entry.energy for entry in self.entries])

    @property
    def weights(self) -> np.ndarray:
        return np.array([entry.weight for entry in self.entries])

    @property
    def max_abs_energy(self) -> float:
        return float(np.max(np.abs(self.energies)))


def diagonalize(h: Hamiltonian) -> EigenDecomposition:
    """Full spectrum of the dense Hermitian matrix."""

    matrix = dense_matrix(h)
    try:
        energies, eigenvectors = scipy.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        logger.error("Dense eigensolver failed on %d-qubit Hamiltonian: %s", h.n_qubits, exc)
        raise

    logger.info(
        "Diagonalized %d x %d matrix, E0 = %.10f", matrix.shape[0], matrix.shape[0], energies[0]
    )
    return EigenDecomposition(energies=energies, eigenvectors=eigenvectors)


def overlaps(decomposition: EigenDecomposition, ref: StateVector) -> OverlapTable:
    """Weight of the reference on each eigenvector."""

    if ref.amplitudes.shape[0] != decomposition.dimension:
        raise ValueError(
            f"Reference dimension {ref.amplitudes.shape[0]} does not match "
            f"Hamiltonian dimension {decomposition.dimension}"
        )

    coefficients = decomposition.eigenvectors.conj().T @ ref.amplitudes
    weights = np.abs(coefficients) ** 2
    return OverlapTable(
        entries=tuple(
            OverlapEntry(float(energy), float(weight))
            for energy, weight in zip(decomposition.energies, weights)
        )
    )


def analytic_signal(
    table: OverlapTable, t: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """Q(t) = sum_i w_i cos(E_i t); accepts a scalar or an array of times."""

    phases = np.multiply.outer(np.asarray(t, dtype=float), table.energies)
    values = np.cos(phases) @ table.weights
    if np.ndim(values) == 0:
        return float(values)
    return values


def distinct_levels(
    table: OverlapTable, tolerance: float = 1e-8, absolute: bool = True
) -> List[Level]:
    """Merge energies a cosine signal cannot tell apart.

    Degenerate eigenvalues always merge. With ``absolute`` the grouping is by
    |E|, so a +E/-E pair also becomes one line.
    """

    keyed = sorted(
        ((abs(e) if absolute else e, e, w) for e, w in table.entries), key=lambda item: item[0]
    )

    levels: List[Level] = []
    group: List[Tuple[float, float, float]] = []
    for item in keyed:
        if group and item[0] - group[-1][0] > tolerance:
            levels.append(_close_group(group))
            group = []
        group.append(item)
    if group:
        levels.append(_close_group(group))
    return levels


def _close_group(group: List[Tuple[float, float, float]]) -> Level:
    weight = sum(w for _, _, w in group)
    energy = float(np.mean([key for key, _, _ in group]))
    return Level(energy=energy, weight=float(weight), members=tuple(e for _, e, _ in group))
