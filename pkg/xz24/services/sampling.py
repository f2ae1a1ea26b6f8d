"""Discretization planning and signal acquisition.

The frequency quantum, interval and sample count are tied by
``delta * interval * count = 2*pi``; the interval is capped by the Nyquist
limit ``pi / |E|max`` and nudged down so that ``count`` is odd.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.config import get_settings
from ..core.errors import PlanError
from ..models.schemas import TWO_PI, EnergyBound, SamplingMode, SamplingPlan
from .hamiltonian import Hamiltonian, basis_expectation, l1_norm_bound
from .parallel import map_ordered
from .simulator import CircuitSimulator, Evaluator, shot_sample
from .states import ReferenceSpec

logger = logging.getLogger(__name__)

# Keeps plan.delta strictly below the target after float rounding.
_T_MAX_NUDGE = 1e-12


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples q(0) .. q(N-1) on the plan's grid."""

    plan: SamplingPlan
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.plan.count,):
            raise ValueError(
                f"Signal holds {self.values.shape[0]} samples, plan expects {self.plan.count}"
            )

    @property
    def times(self) -> np.ndarray:
        return self.plan.times()


def make_plan(
    target_delta: float,
    energy_bound: float,
    requested_interval: Optional[float] = None,
    shots: Optional[int] = None,
    mode: SamplingMode = SamplingMode.MIRROR,
) -> SamplingPlan:
    """Largest Nyquist-safe interval giving an odd sample count and delta <= target."""

    if not (math.isfinite(target_delta) and target_delta > 0):
        raise PlanError(f"target delta must be positive, got {target_delta}")
    if not (math.isfinite(energy_bound) and energy_bound > 0):
        raise PlanError(f"energy bound must be positive, got {energy_bound}")
    if shots is not None and shots < 1:
        raise PlanError(f"shots must be at least 1, got {shots}")

    delta_max = math.pi / energy_bound
    if requested_interval is not None:
        if not requested_interval > 0:
            raise PlanError(f"interval must be positive, got {requested_interval}")
        if requested_interval > delta_max * (1 + 1e-12):
            raise PlanError(
                f"interval {requested_interval} violates Nyquist: "
                f"delta_max = pi/{energy_bound:g} = {delta_max:.4f}"
            )

    interval = min(requested_interval or delta_max, delta_max)
    t_max = (TWO_PI / target_delta) * (1 + _T_MAX_NUDGE)

    count = max(3, math.ceil(t_max / interval - 1e-9))
    if count % 2 == 0:
        count += 1
    interval = t_max / count

    plan = SamplingPlan(
        delta=TWO_PI / (count * interval),
        interval=interval,
        count=count,
        t_max=count * interval,
        mode=mode,
        shots=shots,
        energy_bound=energy_bound,
    )
    logger.info(
        "Plan: delta=%.6g interval=%.6g (max %.6g) N=%d t_max=%.6g, %d evaluations",
        plan.delta,
        plan.interval,
        delta_max,
        plan.count,
        plan.t_max,
        plan.evaluations,
    )
    return plan


def evaluation_count(plan: SamplingPlan) -> int:
    return plan.evaluations


def estimate_energy_bound(
    h: Hamiltonian, spec: Optional[ReferenceSpec] = None, heuristic: bool = False
) -> EnergyBound:
    """|E|max for Nyquist planning.

    The l1 coefficient sum is the default and can never alias. The heuristic
    uses |<ref|H|ref>| of a basis reference (a mean-field energy) and may
    undershoot the true spectral radius.
    """

    l1 = l1_norm_bound(h)
    if not heuristic:
        return EnergyBound(value=l1, heuristic=False, source="l1")

    if spec is None or not spec.is_basis:
        raise PlanError("the basis-expectation bound needs a single-bitstring reference")

    value = abs(basis_expectation(h, spec.bitstring))
    if value == 0.0:
        logger.warning("Basis expectation is zero; falling back to the l1 bound %.6g", l1)
        return EnergyBound(value=l1, heuristic=False, source="l1")

    logger.warning(
        "Using heuristic energy bound %.6g (l1 bound %.6g); aliasing is possible", value, l1
    )
    return EnergyBound(value=value, heuristic=True, source="basis-expectation")


def acquire_signal(
    h: Hamiltonian,
    spec: ReferenceSpec,
    plan: SamplingPlan,
    *,
    evaluator: Optional[Evaluator] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> Signal:
    """Evaluate q(n) on the plan's grid.

    Mirror mode evaluates n = 0 .. (N-1)/2 and fills the rest with
    q(n) = q(N - n). Shot noise, when the plan asks for it, is drawn per
    point from a generator seeded with ``(seed, n)``, so results do not depend
    on the worker count.
    """

    settings = get_settings()
    evaluator = Evaluator(evaluator or settings.evaluator)
    seed = settings.seed if seed is None else seed
    workers = settings.workers if workers is None else workers
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")

    simulator = CircuitSimulator(h, spec)

    def evaluate(n: int) -> float:
        result = simulator.point(n * plan.interval, evaluator)
        if plan.shots is not None:
            result = shot_sample(result, plan.shots, (seed, n))
        return result.q

    evaluated = np.array(map_ordered(evaluate, range(plan.evaluations), workers), dtype=float)

    if plan.mode is SamplingMode.MIRROR:
        values = np.empty(plan.count, dtype=float)
        half = evaluated.shape[0]
        values[:half] = evaluated
        values[half:] = evaluated[1:half][::-1]
    else:
        values = evaluated

    logger.info(
        "Acquired %d samples (%d evaluated, %s mode, %s evaluator, shots=%s)",
        plan.count,
        plan.evaluations,
        plan.mode.value,
        evaluator.value,
        plan.shots,
    )
    return Signal(plan=plan, values=values)
