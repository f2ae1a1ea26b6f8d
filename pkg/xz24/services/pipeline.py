"""End-to-end runs: plan, sample, transform, detect, resolve signs, compare."""

from __future__ import annotations

import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import get_settings
from ..core.errors import PlanError, ReferenceStateError, StageError, XZ24Error
from ..models.schemas import (
    TWO_PI,
    EigenEstimate,
    MergedLine,
    MultiReferenceReport,
    RunConfig,
    RunReport,
    SamplingMode,
    SamplingPlan,
    Sign,
    SweepPoint,
    SweepReport,
)
from .hamiltonian import Hamiltonian
from .oracle import OverlapTable, overlaps
from .report import build_run_report, summarize_hamiltonian
from .sampling import Signal, acquire_signal, estimate_energy_bound, make_plan
from .signs import apply_resolution, assume_negative, resolve_signs
from .simulator import Evaluator, get_propagator
from .spectral import Spectrum, detect_peaks, recover_report, transform
from .states import ReferenceSpec, prepare_reference

logger = logging.getLogger(__name__)


@contextmanager
def stage(name: str, timings: Dict[str, float]) -> Iterator[None]:
    """Time a pipeline stage and tag any failure with its name."""

    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except (XZ24Error, ValueError, RuntimeError, OSError, ArithmeticError) as exc:
        logger.error("Stage '%s' failed: %s", name, exc)
        raise StageError(name, exc) from exc
    finally:
        timings[name] = time.perf_counter() - start
        logger.info("Stage '%s' took %.3f s", name, timings[name])


@dataclass
class RunArtifacts:
    """A finished run: the report plus the dense series it was computed from."""

    report: RunReport
    signal: Signal
    spectrum: Spectrum
    oracle: Optional[OverlapTable] = None
    timings: Dict[str, float] = field(default_factory=dict)


def oracle_table(h: Hamiltonian, spec: ReferenceSpec) -> OverlapTable:
    """Exact overlaps, sharing the eigendecomposition the simulator caches."""

    decomposition = get_propagator(h).decomposition
    return overlaps(decomposition, prepare_reference(spec, h.n_qubits))


def run_pipeline(
    h: Hamiltonian,
    spec: ReferenceSpec,
    config: RunConfig,
    *,
    workers: Optional[int] = None,
) -> RunArtifacts:
    settings = get_settings()
    timings: Dict[str, float] = {}
    evaluator = Evaluator(config.evaluator)

    with stage("plan", timings):
        bound = estimate_energy_bound(h, spec, heuristic=config.heuristic_bound)
        s0 = 0.0
        if config.resolve_signs and not config.assume_negative:
            s0 = config.s0 if config.s0 is not None else settings.default_offset(
                config.target_delta
            )
        plan = make_plan(
            config.target_delta,
            bound.value + s0,
            requested_interval=config.interval,
            shots=config.shots,
            mode=config.mode,
        )

    with stage("sample", timings):
        signal = acquire_signal(
            h, spec, plan, evaluator=evaluator, seed=config.seed, workers=workers
        )

    with stage("analyze", timings):
        spectrum = transform(signal)
        estimates = detect_peaks(spectrum, config.threshold)

    resolution = None
    if config.assume_negative:
        logger.warning("Assuming every eigenvalue is negative; signs were not measured")
        estimates = assume_negative(estimates)
    elif config.resolve_signs:
        with stage("resolve-sign", timings):
            resolution = resolve_signs(
                h,
                spec,
                plan,
                s0,
                estimates,
                threshold=config.threshold,
                energy_bound=bound.value,
                evaluator=evaluator,
                seed=config.seed,
                workers=workers,
            )
            estimates = apply_resolution(estimates, resolution)

    table = None
    recovery = None
    if config.oracle:
        with stage("oracle", timings):
            table = oracle_table(h, spec)
            recovery = recover_report(h, estimates, table, plan=plan, threshold=config.threshold)

    report = build_run_report(
        config,
        h,
        bound,
        plan,
        spectrum.a0,
        estimates,
        resolution=resolution,
        recovery=recovery,
        timings=timings,
    )
    return RunArtifacts(
        report=report, signal=signal, spectrum=spectrum, oracle=table, timings=timings
    )


def fit_power_law(
    t_values: Sequence[float], errors: Sequence[Optional[float]]
) -> Optional[Tuple[float, float]]:
    """Least-squares fit of error = A * t^p in log-log space.

    Zero or missing errors (a line landing exactly on a bin) carry no scale
    information and are left out. Returns None when fewer than two distinct
    t values remain.
    """

    points = [
        (float(t), float(e))
        for t, e in zip(t_values, errors)
        if e is not None and e > 0 and math.isfinite(e) and t > 0
    ]
    if len({t for t, _ in points}) < 2:
        return None
    log_t = np.log([t for t, _ in points])
    log_e = np.log([e for _, e in points])
    exponent, intercept = np.polyfit(log_t, log_e, 1)
    return float(np.exp(intercept)), float(exponent)


def _sweep_point(
    h: Hamiltonian,
    spec: ReferenceSpec,
    plan: SamplingPlan,
    table: OverlapTable,
    threshold: float,
    *,
    evaluator: Optional[Evaluator],
    workers: Optional[int],
    aliased: bool = False,
) -> SweepPoint:
    signal = acquire_signal(h, spec, plan, evaluator=evaluator, workers=workers)
    estimates = detect_peaks(transform(signal), threshold)
    recovery = recover_report(h, estimates, table, plan=plan, threshold=threshold)
    logger.info(
        "Sweep point t_max=%.6g interval=%.4g: delta=%.3e max_error=%s",
        plan.t_max,
        plan.interval,
        plan.delta,
        recovery.max_error,
    )
    return SweepPoint(
        t_max=plan.t_max,
        delta=plan.delta,
        interval=plan.interval,
        count=plan.count,
        max_error=recovery.max_error,
        n_estimates=len(estimates),
        aliased=aliased,
    )


def precision_sweep(
    h: Hamiltonian,
    spec: ReferenceSpec,
    t_max_values: Sequence[float],
    interval: float,
    threshold: Optional[float] = None,
    *,
    evaluator: Optional[Evaluator] = None,
    workers: Optional[int] = None,
) -> SweepReport:
    """Max recovery error against t_max at a fixed sampling interval."""

    threshold = get_settings().peak_threshold if threshold is None else threshold
    if not t_max_values:
        raise ValueError("precision sweep needs at least one t_max value")

    bound = estimate_energy_bound(h, spec)
    table = oracle_table(h, spec)

    points: List[SweepPoint] = []
    for t_max in sorted(t_max_values):
        if not t_max > 0:
            raise ValueError(f"t_max must be positive, got {t_max}")
        plan = make_plan(
            TWO_PI / t_max, bound.value, requested_interval=interval, mode=SamplingMode.MIRROR
        )
        points.append(
            _sweep_point(h, spec, plan, table, threshold, evaluator=evaluator, workers=workers)
        )

    fit = fit_power_law([p.t_max for p in points], [p.max_error for p in points])
    return SweepReport(
        varied="t_max",
        threshold=threshold,
        points=points,
        nyquist_interval=_nyquist_interval(h),
        fit_coefficient=fit[0] if fit else None,
        fit_exponent=fit[1] if fit else None,
    )


def _nyquist_interval(h: Hamiltonian) -> float:
    radius = float(np.max(np.abs(get_propagator(h).decomposition.energies)))
    return math.pi / radius if radius > 0 else math.inf


def interval_plan(t_max: float, interval: float) -> SamplingPlan:
    """Mirror grid with exactly ``interval`` spacing and at least ``t_max`` span.

    No Nyquist check: the grid's bound is whatever the interval can represent,
    which is the point of sweeping past pi / max|E|.
    """

    if not (math.isfinite(interval) and interval > 0):
        raise PlanError(f"interval must be positive, got {interval}")
    if not (math.isfinite(t_max) and t_max > 0):
        raise PlanError(f"t_max must be positive, got {t_max}")
    count = max(3, math.ceil(t_max / interval - 1e-9))
    if count % 2 == 0:
        count += 1
    return SamplingPlan.from_grid(interval, count, mode=SamplingMode.MIRROR)


def interval_sweep(
    h: Hamiltonian,
    spec: ReferenceSpec,
    t_max: float,
    intervals: Sequence[float],
    threshold: Optional[float] = None,
    *,
    evaluator: Optional[Evaluator] = None,
    workers: Optional[int] = None,
) -> SweepReport:
    """Max recovery error against the sampling interval at a fixed t_max.

    Intervals beyond pi / max|E| are sampled anyway and flagged as aliased;
    their lines fold back and the error jumps far above delta.
    """

    threshold = get_settings().peak_threshold if threshold is None else threshold
    if not intervals:
        raise ValueError("interval sweep needs at least one interval")

    table = oracle_table(h, spec)
    nyquist = _nyquist_interval(h)

    points: List[SweepPoint] = []
    for interval in sorted(intervals):
        plan = interval_plan(t_max, interval)
        aliased = interval > nyquist * (1 + 1e-12)
        if aliased:
            logger.warning(
                "Interval %.4g exceeds the Nyquist interval %.4g; expect folded lines",
                interval,
                nyquist,
            )
        points.append(
            _sweep_point(
                h,
                spec,
                plan,
                table,
                threshold,
                evaluator=evaluator,
                workers=workers,
                aliased=aliased,
            )
        )

    return SweepReport(
        varied="interval", threshold=threshold, points=points, nyquist_interval=nyquist
    )


def merge_lines(runs: Sequence[RunReport], tolerance: float) -> List[MergedLine]:
    """Union of the lines found from several references, ascending in |E|.

    Estimates within ``tolerance`` of each other in |E| are one line; its
    energy is that of the strongest member. When members disagree on the
    sign the cluster splits into a positive and a negative line, and members
    with no measured sign join the stronger of the two.
    """

    found: List[Tuple[EigenEstimate, str]] = sorted(
        ((estimate, run.config.reference) for run in runs for estimate in run.estimates),
        key=lambda item: item[0].abs_energy,
    )

    clusters: List[List[Tuple[EigenEstimate, str]]] = []
    for item in found:
        if clusters and item[0].abs_energy - clusters[-1][-1][0].abs_energy <= tolerance:
            clusters[-1].append(item)
        else:
            clusters.append([item])

    lines: List[MergedLine] = []
    for cluster in clusters:
        by_sign: Dict[Sign, List[Tuple[EigenEstimate, str]]] = {}
        for item in cluster:
            by_sign.setdefault(item[0].sign, []).append(item)
        resolved = [sign for sign in (Sign.NEGATIVE, Sign.POSITIVE) if sign in by_sign]

        if len(resolved) < 2:
            groups = [cluster]
        else:
            groups = [by_sign[Sign.NEGATIVE], by_sign[Sign.POSITIVE]]
            rest = [item for item in cluster if item[0].sign not in resolved]
            strongest = max(groups, key=lambda g: max(e.amplitude for e, _ in g))
            strongest.extend(rest)

        for group in groups:
            lead = max(group, key=lambda item: item[0].amplitude)[0]
            signed = [e for e, _ in group if e.sign in (Sign.POSITIVE, Sign.NEGATIVE)]
            sign = max(signed, key=lambda e: e.amplitude).sign if signed else Sign.UNKNOWN
            energy = None
            if sign is Sign.POSITIVE:
                energy = lead.abs_energy
            elif sign is Sign.NEGATIVE:
                energy = -lead.abs_energy
            lines.append(
                MergedLine(
                    abs_energy=lead.abs_energy,
                    energy=energy,
                    sign=sign,
                    amplitude=lead.amplitude,
                    references=list(dict.fromkeys(reference for _, reference in group)),
                )
            )
    return lines


def run_references(
    h: Hamiltonian,
    specs: Sequence[ReferenceSpec],
    config: RunConfig,
    *,
    workers: Optional[int] = None,
) -> MultiReferenceReport:
    """Run the pipeline once per reference state and merge the lines they reveal.

    A single reference only sees eigenstates it overlaps; excited references
    light up the rest of the spectrum.
    """

    if not specs:
        raise ReferenceStateError("at least one reference state is required")

    runs: List[RunReport] = []
    for index, spec in enumerate(specs, start=1):
        reference = spec.describe()
        logger.info("Reference %d/%d: %s", index, len(specs), reference)
        artifacts = run_pipeline(
            h, spec, config.model_copy(update={"reference": reference}), workers=workers
        )
        runs.append(artifacts.report)

    delta = max(run.plan.delta for run in runs)
    lines = merge_lines(runs, delta)
    logger.info("%d references revealed %d distinct lines", len(runs), len(lines))
    return MultiReferenceReport(
        hamiltonian=summarize_hamiltonian(h),
        delta=delta,
        runs=runs,
        lines=lines,
        success=all(run.recovery is None or run.recovery.success for run in runs),
    )
