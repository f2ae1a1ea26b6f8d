"""Eigenvalue signs from the peak shifts of H + s0*I.

Adding s0 > 0 moves a positive eigenvalue's peak right (|E + s0| > |E|) and
a negative one's peak left. A base peak that owns two shifted peaks moving
in opposite directions is a +E/-E collision and is reported ambiguous.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Tuple

from ..core.errors import SignResolutionError
from ..models.schemas import EigenEstimate, SamplingPlan, Sign, SignPair, SignResolution
from .hamiltonian import Hamiltonian, l1_norm_bound, offset
from .sampling import acquire_signal
from .simulator import Evaluator
from .spectral import detect_peaks, transform
from .states import ReferenceSpec

logger = logging.getLogger(__name__)


def check_offset(plan: SamplingPlan, s0: float, energy_bound: Optional[float] = None) -> None:
    """Reject offsets the plan cannot resolve or sample without aliasing.

    ``energy_bound`` is |E|max of the unshifted Hamiltonian; the shifted one
    reaches at most energy_bound + s0. It defaults to the plan's own bound.
    """

    base = plan.energy_bound if energy_bound is None else energy_bound

    if not math.isfinite(s0) or s0 < 0:
        raise SignResolutionError(f"offset must be a non-negative finite number, got {s0}")
    if s0 == 0:
        return
    minimum = 2 * plan.delta
    if s0 < minimum:
        raise SignResolutionError(
            f"offset {s0:g} is below the resolution of this plan; need s0 >= {minimum:.6g}"
        )
    if plan.interval * (base + s0) > math.pi * (1 + 1e-12):
        raise SignResolutionError(
            f"interval {plan.interval:.6g} aliases the offset Hamiltonian; "
            f"plan with an energy bound of at least {base + s0:.6g}"
        )
    if s0 > 0.25 * base:
        logger.warning("Offset %.4g is large relative to the energy bound %.4g", s0, base)


def match_shifted_peaks(
    base: List[EigenEstimate], shifted: List[EigenEstimate], s0: float, delta: float
) -> SignResolution:
    """Greedy nearest-|E| pairing of base and shifted peaks within s0 + 2*delta."""

    cap = s0 + 2 * delta
    candidates: List[Tuple[float, int, int]] = sorted(
        (abs(s.abs_energy - b.abs_energy), i, j)
        for i, b in enumerate(base)
        for j, s in enumerate(shifted)
        if abs(s.abs_energy - b.abs_energy) <= cap
    )

    partner: Dict[int, int] = {}
    taken = set()
    for _, i, j in candidates:
        if i not in partner and j not in taken:
            partner[i] = j
            taken.add(j)

    collided = set()
    unmatched_shifted = [j for j in range(len(shifted)) if j not in taken]
    for j in unmatched_shifted:
        owners = [(dist, i) for dist, i, jj in candidates if jj == j]
        if not owners:
            continue
        _, i = min(owners)
        if i not in partner:
            continue
        stray = shifted[j].abs_energy - base[i].abs_energy
        kept = shifted[partner[i]].abs_energy - base[i].abs_energy
        if stray * kept < 0 and min(abs(stray), abs(kept)) > delta:
            collided.add(i)

    pairs: List[SignPair] = []
    for i, estimate in enumerate(base):
        if i not in partner:
            logger.warning("No shifted peak near |E| = %.6f; sign unknown", estimate.abs_energy)
            pairs.append(SignPair(base_abs_energy=estimate.abs_energy, sign=Sign.UNKNOWN))
            continue

        moved = shifted[partner[i]]
        shift = moved.abs_energy - estimate.abs_energy
        if i in collided:
            sign = Sign.AMBIGUOUS
        elif shift > delta:
            sign = Sign.POSITIVE
        elif shift < -delta:
            sign = Sign.NEGATIVE
        else:
            sign = Sign.AMBIGUOUS

        signed: Optional[float] = None
        if sign is Sign.POSITIVE:
            signed = estimate.abs_energy
        elif sign is Sign.NEGATIVE:
            signed = -estimate.abs_energy

        pairs.append(
            SignPair(
                base_abs_energy=estimate.abs_energy,
                shifted_abs_energy=moved.abs_energy,
                shift=shift,
                sign=sign,
                signed_energy=signed,
            )
        )

    return SignResolution(
        s0=s0,
        pairs=pairs,
        unmatched_shifted=[shifted[j].abs_energy for j in unmatched_shifted],
    )


def resolve_signs(
    h: Hamiltonian,
    spec: ReferenceSpec,
    plan: SamplingPlan,
    s0: float,
    base_estimates: List[EigenEstimate],
    *,
    threshold: Optional[float] = None,
    energy_bound: Optional[float] = None,
    evaluator: Optional[Evaluator] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> SignResolution:
    """Rerun the pipeline on H + s0*I with the same plan and classify every shift."""

    check_offset(plan, s0, l1_norm_bound(h) if energy_bound is None else energy_bound)
    shifted_signal = acquire_signal(
        offset(h, s0), spec, plan, evaluator=evaluator, seed=seed, workers=workers
    )
    shifted = detect_peaks(transform(shifted_signal), threshold)
    resolution = match_shifted_peaks(base_estimates, shifted, s0, plan.delta)

    counts = {sign: 0 for sign in Sign}
    for pair in resolution.pairs:
        counts[pair.sign] += 1
    logger.info(
        "Sign resolution with s0=%.4g: %d positive, %d negative, %d ambiguous, %d unknown",
        s0,
        counts[Sign.POSITIVE],
        counts[Sign.NEGATIVE],
        counts[Sign.AMBIGUOUS],
        counts[Sign.UNKNOWN],
    )
    return resolution


def apply_resolution(
    estimates: List[EigenEstimate], resolution: SignResolution
) -> List[EigenEstimate]:
    """Copy resolved signs onto the estimates; ambiguous ones stay unknown."""

    resolved = []
    for estimate, pair in zip(estimates, resolution.pairs):
        if pair.sign in (Sign.POSITIVE, Sign.NEGATIVE):
            estimate = estimate.model_copy(
                update={"sign": pair.sign, "energy": pair.signed_energy}
            )
        resolved.append(estimate)
    return resolved


def assume_negative(estimates: List[EigenEstimate]) -> List[EigenEstimate]:
    """Treat every peak as a negative eigenvalue (typical for bound molecular states)."""

    return [
        estimate.model_copy(update={"sign": Sign.NEGATIVE, "energy": -estimate.abs_energy})
        for estimate in estimates
    ]
