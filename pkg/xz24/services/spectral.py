"""Fourier analysis of q(n): coefficients, peaks, and the oracle comparison.

For an odd sample count N the signal is reconstructed as

    q(n) = a_0 + sum_{k=1}^{(N-1)/2} a_k cos(2*pi*k*n/N),
    a_0 = R(0)/N,  a_k = 2 Re R(k) / N,

with R the DFT of q. Bin k sits at x_k = k/(N*interval) cycles per time
unit, i.e. |E| = 2*pi*x_k = k * delta.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.fft

from ..core.config import get_settings
from ..core.errors import SpectralError
from ..models.schemas import (
    TWO_PI,
    EigenEstimate,
    EstimateMatch,
    HamiltonianSummary,
    LevelMatch,
    RecoveryReport,
    SamplingMode,
    SamplingPlan,
)
from .hamiltonian import Hamiltonian, l1_norm_bound
from .oracle import OverlapTable, distinct_levels
from .sampling import Signal

logger = logging.getLogger(__name__)

# Offset scan for fitting a peak: full half-bin, then a refinement around the optimum.
FIT_SPANS = (0.5, 0.005)
FIT_POINTS = 201
IMAGINARY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Spectrum:
    """a_0 and a_1 .. a_M (M = (N-1)/2) on the plan's frequency grid."""

    plan: SamplingPlan
    a0: float
    coefficients: np.ndarray
    imag_residual: float = 0.0

    @property
    def bins(self) -> np.ndarray:
        return np.arange(1, self.coefficients.shape[0] + 1)

    @property
    def frequencies(self) -> np.ndarray:
        return self.bins / (self.plan.count * self.plan.interval)

    @property
    def energies(self) -> np.ndarray:
        return TWO_PI * self.frequencies

    def reconstruct_origin(self) -> float:
        """a_0 + sum a_k, which equals q(0)."""
        return float(self.a0 + self.coefficients.sum())


def transform(signal: Signal) -> Spectrum:
    """DFT of the signal reduced to the cosine coefficients a_k."""

    values = np.asarray(signal.values, dtype=float)
    count = values.shape[0]
    if count % 2 == 0:
        raise SpectralError(f"signal length must be odd, got {count}")

    spectrum = scipy.fft.fft(values)
    half = (count - 1) // 2
    positive = spectrum[1 : half + 1]

    imag_residual = float(np.max(np.abs(positive.imag))) if half else 0.0
    mirrored = signal.plan.mode is SamplingMode.MIRROR and signal.plan.shots is None
    if mirrored and imag_residual > IMAGINARY_TOLERANCE * count:
        logger.warning(
            "Mirror-mode spectrum has imaginary residue %.3e (tolerance %.3e)",
            imag_residual,
            IMAGINARY_TOLERANCE * count,
        )

    return Spectrum(
        plan=signal.plan,
        a0=float(spectrum[0].real / count),
        coefficients=2.0 * positive.real / count,
        imag_residual=imag_residual,
    )


def _dirichlet(x: np.ndarray, count: int, full: bool) -> np.ndarray:
    """Response at distance ``x`` bins from a unit cosine, on an N-point grid.

    Mirror grids are symmetric about t = 0 and give the real kernel
    sin(pi x) / (N sin(pi x / N)); one-sided grids multiply it by the phase
    factor cos(pi x (N - 1) / N) that survives taking Re R(k).
    """

    x = np.asarray(x, dtype=float)
    denominator = count * np.sin(np.pi * x / count)
    at_zero = np.abs(denominator) < 1e-12
    kernel = np.where(at_zero, 1.0, np.sin(np.pi * x) / np.where(at_zero, 1.0, denominator))
    if full:
        kernel = kernel * np.cos(np.pi * x * (count - 1) / count)
    return kernel


def tone_response(nu, bins, plan: SamplingPlan) -> np.ndarray:
    """a_k left at ``bins`` by cos(E t) with E = nu * delta and unit weight.

    ``nu`` and ``bins`` broadcast; the second term is the tone's image at -nu.
    """

    full = plan.mode is SamplingMode.FULL
    nu = np.asarray(nu, dtype=float)
    bins = np.asarray(bins, dtype=float)
    return _dirichlet(nu - bins, plan.count, full) + _dirichlet(nu + bins, plan.count, full)


def fit_tone(k: int, coefficients: np.ndarray, plan: SamplingPlan) -> Tuple[float, float]:
    """Fractional bin position and weight of the tone behind the peak at bin ``k``.

    Least squares over bins k-1 .. k+1, scanning the offset in [-1/2, 1/2]
    on a coarse grid and then on a fine one around the coarse optimum.
    """

    window = np.arange(max(k - 1, 1), min(k + 1, coefficients.shape[0]) + 1)
    observed = coefficients[window - 1]

    best, weight = 0.0, float(coefficients[k - 1])
    for span in FIT_SPANS:
        offsets = np.clip(best + np.linspace(-span, span, FIT_POINTS), -0.5, 0.5)
        model = tone_response(k + offsets[:, None], window[None, :], plan)
        norms = np.maximum(np.einsum("ij,ij->i", model, model), np.finfo(float).tiny)
        weights = model @ observed / norms
        misfit = np.sum((observed - weights[:, None] * model) ** 2, axis=1)
        index = int(np.argmin(misfit))
        best, weight = float(offsets[index]), float(weights[index])
    return k + best, weight


def detect_peaks(
    spectrum: Spectrum, threshold: Optional[float] = None, margin: Optional[float] = None
) -> List[EigenEstimate]:
    """Significant local maxima of a_k, strongest first.

    A bin qualifies when it clears ``threshold``, beats its left neighbour and
    is not beaten by its right one (so two equal bins straddling a tone yield
    one peak). Candidates are then visited in descending amplitude. Each
    accepted peak is fitted as a single cosine and its exact leakage over the
    whole grid is accumulated; a later candidate is kept only while it
    exceeds ``margin`` times that predicted leakage. Off-grid tones thus lose
    their sidelobe comb while an on-grid tone, which leaks nothing, cannot
    hide a weaker neighbour. ``margin=0`` keeps every local maximum. DC
    (k = 0) is never a candidate.
    """

    settings = get_settings()
    threshold = settings.peak_threshold if threshold is None else threshold
    margin = settings.leakage_margin if margin is None else margin
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if margin < 0:
        raise ValueError(f"leakage margin must be non-negative, got {margin}")

    a = spectrum.coefficients
    if a.size == 0:
        return []

    left = np.concatenate([[-np.inf], a[:-1]])
    right = np.concatenate([a[1:], [-np.inf]])
    candidate_index = np.flatnonzero((a >= threshold) & (a > left) & (a >= right))
    order = candidate_index[np.argsort(-a[candidate_index], kind="stable")]

    bins = spectrum.bins
    leakage = np.zeros_like(a)
    accepted: List[Tuple[int, float]] = []
    for index in order:
        k = int(index) + 1
        if margin > 0:
            if a[index] <= margin * leakage[index]:
                continue
            nu, weight = fit_tone(k, a - leakage, spectrum.plan)
            leakage += weight * tone_response(nu, bins, spectrum.plan)
        accepted.append((k, float(a[index])))

    grid = spectrum.plan.count * spectrum.plan.interval
    estimates = [
        EigenEstimate(bin=k, x=k / grid, abs_energy=TWO_PI * k / grid, amplitude=amplitude)
        for k, amplitude in accepted
    ]
    logger.info(
        "Detected %d peaks (%d local maxima above threshold %.3g)",
        len(estimates),
        candidate_index.size,
        threshold,
    )
    return estimates


def recover_report(
    h: Hamiltonian,
    estimates: List[EigenEstimate],
    oracle: Optional[OverlapTable] = None,
    *,
    plan: SamplingPlan,
    threshold: Optional[float] = None,
) -> RecoveryReport:
    """Compare estimates with exact lines merged by |E|.

    A line is required when its weight reaches ``threshold`` and it sits at
    least one bin away from DC; it is recovered when some estimate lies
    within plan.delta of it. Without an oracle the report is empty and
    trivially successful.
    """

    threshold = get_settings().peak_threshold if threshold is None else threshold
    summary = HamiltonianSummary(
        n_qubits=h.n_qubits, n_terms=h.n_terms, l1_bound=l1_norm_bound(h)
    )
    if oracle is None:
        return RecoveryReport(
            hamiltonian=summary,
            delta=plan.delta,
            threshold=threshold,
            levels=[],
            estimates=[],
            success=True,
        )

    tolerance = plan.delta * (1 + 1e-9)
    found = np.array([estimate.abs_energy for estimate in estimates])
    levels = distinct_levels(oracle, absolute=True)

    level_matches: List[LevelMatch] = []
    for level in levels:
        required = level.weight >= threshold and level.energy >= plan.delta
        match = LevelMatch(
            abs_energy=level.energy,
            weight=level.weight,
            signed_energies=list(level.members),
            required=required,
        )
        if found.size:
            nearest = int(np.argmin(np.abs(found - level.energy)))
            error = abs(float(found[nearest]) - level.energy)
            match = match.model_copy(
                update={
                    "estimate_abs_energy": float(found[nearest]),
                    "error": error,
                    "recovered": error <= tolerance,
                }
            )
        level_matches.append(match)

    line_energies = np.array([level.energy for level in levels])
    estimate_matches = []
    for estimate in estimates:
        nearest = int(np.argmin(np.abs(line_energies - estimate.abs_energy)))
        estimate_matches.append(
            EstimateMatch(
                bin=estimate.bin,
                abs_energy=estimate.abs_energy,
                nearest_oracle_abs_energy=float(line_energies[nearest]),
                error=abs(estimate.abs_energy - float(line_energies[nearest])),
            )
        )

    required = [match for match in level_matches if match.required]
    missed = [match.abs_energy for match in required if not match.recovered]
    errors = [match.error for match in required if match.error is not None]
    report = RecoveryReport(
        hamiltonian=summary,
        delta=plan.delta,
        threshold=threshold,
        levels=level_matches,
        estimates=estimate_matches,
        max_error=max(errors) if len(errors) == len(required) and errors else None,
        missed=missed,
        success=not missed,
    )
    if missed:
        logger.warning("Missed %d of %d required oracle lines", len(missed), len(required))
    return report
