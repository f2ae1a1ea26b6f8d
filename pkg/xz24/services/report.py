"""Assemble the run report and its fixed-width text summary."""

from __future__ import annotations

from typing import Dict, List, Optional

from ..models.schemas import (
    EigenEstimate,
    EnergyBound,
    HamiltonianSummary,
    MultiReferenceReport,
    RecoveryReport,
    RunConfig,
    RunReport,
    SamplingPlan,
    SignResolution,
    SweepReport,
)
from .hamiltonian import Hamiltonian, l1_norm_bound

RULE = "=" * 60
THIN_RULE = "-" * 60


def summarize_hamiltonian(h: Hamiltonian) -> HamiltonianSummary:
    return HamiltonianSummary(n_qubits=h.n_qubits, n_terms=h.n_terms, l1_bound=l1_norm_bound(h))


def build_run_report(
    config: RunConfig,
    h: Hamiltonian,
    energy_bound: EnergyBound,
    plan: SamplingPlan,
    dc_amplitude: float,
    estimates: List[EigenEstimate],
    resolution: Optional[SignResolution] = None,
    recovery: Optional[RecoveryReport] = None,
    timings: Optional[Dict[str, float]] = None,
) -> RunReport:
    return RunReport(
        config=config,
        hamiltonian=summarize_hamiltonian(h),
        energy_bound=energy_bound,
        plan=plan,
        dc_amplitude=dc_amplitude,
        estimates=estimates,
        resolution=resolution,
        recovery=recovery,
        timings=dict(timings or {}),
    )


def _section(title: str) -> List[str]:
    return ["", THIN_RULE, title, THIN_RULE]


def _format_energy(estimate: EigenEstimate) -> str:
    if estimate.energy is None:
        return f"+/-{estimate.abs_energy:.8f}"
    return f"{estimate.energy:+.8f}"


def render_summary(report: RunReport) -> str:
    """Human-readable view of a run, printed by ``xz24 run``."""

    plan = report.plan
    bound = report.energy_bound
    heuristic = ", heuristic" if bound.heuristic else ""
    lines = [
        RULE,
        "XZ24 EIGENVALUE RUN",
        RULE,
        f"Hamiltonian: {report.config.hamiltonian_path} "
        f"({report.hamiltonian.n_qubits} qubits, {report.hamiltonian.n_terms} terms)",
        f"Reference:   {report.config.reference}",
    ]

    lines.extend(_section("SAMPLING PLAN"))
    lines.extend(
        [
            f"energy bound  {bound.value:.6g} ({bound.source}{heuristic})",
            f"delta_max     {plan.delta_max:.6g}",
            f"interval      {plan.interval:.6g}",
            f"N             {plan.count}",
            f"t_max         {plan.t_max:.6g}",
            f"delta         {plan.delta:.6g}",
            f"evaluations   {plan.evaluations} ({plan.mode.value})",
            f"shots         {plan.shots if plan.shots is not None else 'exact'}",
        ]
    )

    lines.extend(_section("ESTIMATES"))
    lines.append(f"a_0 (DC)      {report.dc_amplitude:.6f}")
    if not report.estimates:
        lines.append("No peaks above threshold.")
    for estimate in report.estimates:
        lines.append(
            f"k={estimate.bin:<8d} E={_format_energy(estimate):>16}  "
            f"a={estimate.amplitude:.6f}  sign={estimate.sign.value}"
        )

    if report.resolution is not None:
        lines.extend(_section(f"SIGN RESOLUTION (s0 = {report.resolution.s0:.6g})"))
        for pair in report.resolution.pairs:
            shifted = (
                f"{pair.shifted_abs_energy:.8f}" if pair.shifted_abs_energy is not None else "-"
            )
            lines.append(f"|E|={pair.base_abs_energy:.8f} -> {shifted}  {pair.sign.value}")

    if report.recovery is not None and report.recovery.levels:
        recovery = report.recovery
        lines.extend(_section("ORACLE COMPARISON"))
        for level in recovery.levels:
            if not level.required:
                continue
            status = "ok" if level.recovered else "MISSED"
            error = f"{level.error:.3e}" if level.error is not None else "-"
            lines.append(
                f"|E|={level.abs_energy:.8f}  w={level.weight:.6f}  err={error}  {status}"
            )
        max_error = f"{recovery.max_error:.3e}" if recovery.max_error is not None else "-"
        lines.append(f"max error {max_error} (delta {recovery.delta:.3e})")
        lines.append("RESULT: " + ("PASS" if recovery.success else "FAIL"))

    lines.append(RULE)
    return "\n".join(lines)


def render_sweep(report: SweepReport) -> str:
    title = "PRECISION SWEEP" if report.varied == "t_max" else "INTERVAL SWEEP"
    lines = [RULE, title, RULE]
    if report.nyquist_interval is not None:
        lines.append(f"nyquist interval {report.nyquist_interval:.6g}")
    for point in report.points:
        error = f"{point.max_error:.3e}" if point.max_error is not None else "-"
        flag = "  aliased" if point.aliased else ""
        lines.append(
            f"t_max={point.t_max:<12.6g} interval={point.interval:<8.4g} "
            f"delta={point.delta:.3e}  N={point.count:<8d} err={error}{flag}"
        )
    if report.fit_coefficient is not None:
        lines.append(
            f"fit: max_error = {report.fit_coefficient:.4g} * t_max^{report.fit_exponent:.3f}"
        )
    lines.append(RULE)
    return "\n".join(lines)


def render_references(report: MultiReferenceReport) -> str:
    """Merged line table printed by ``xz24 run --excitations``."""

    lines = [
        RULE,
        "MULTI-REFERENCE RUN",
        RULE,
        f"{len(report.runs)} references, {len(report.lines)} distinct lines "
        f"(merge tolerance {report.delta:.3e})",
    ]
    lines.extend(_section("LINES"))
    for line in report.lines:
        energy = f"{line.energy:+.8f}" if line.energy is not None else f"+/-{line.abs_energy:.8f}"
        lines.append(
            f"E={energy:>16}  a={line.amplitude:.6f}  refs={len(line.references):<4d} "
            f"{','.join(line.references[:3])}{',...' if len(line.references) > 3 else ''}"
        )

    recoveries = [run.recovery for run in report.runs if run.recovery is not None]
    if recoveries:
        lines.append("")
        lines.append("RESULT: " + ("PASS" if report.success else "FAIL"))
    lines.append(RULE)
    return "\n".join(lines)
