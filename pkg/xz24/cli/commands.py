"""Subcommand handlers; each returns the process exit code."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, Tuple

from ..core.config import get_settings
from ..core.errors import PlanError, ReferenceStateError
from ..models.schemas import EnergyBound, OracleEntry, OracleReport, RunConfig, SamplingMode
from ..services import io
from ..services.hamiltonian import Hamiltonian, check_dimension, l1_norm_bound, parse_hamiltonian
from ..services.oracle import diagonalize, overlaps
from ..services.pipeline import interval_sweep, precision_sweep, run_pipeline, run_references, stage
from ..services.report import render_references, render_summary, render_sweep
from ..services.sampling import acquire_signal, estimate_energy_bound, make_plan
from ..services.simulator import Evaluator
from ..services.spectral import detect_peaks, transform
from ..services.states import ReferenceSpec, excited_references, prepare_reference

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ORACLE_FAILED = 1
EXIT_STAGE_ERROR = 2


def _load_hamiltonian(path: str) -> Hamiltonian:
    h = parse_hamiltonian(Path(path).read_text(encoding="utf-8"))
    check_dimension(h.n_qubits)
    return h


def _load_inputs(
    args: argparse.Namespace, timings: Dict[str, float]
) -> Tuple[Hamiltonian, ReferenceSpec]:
    with stage("load", timings):
        h = _load_hamiltonian(args.hamiltonian)
        spec = ReferenceSpec.parse(args.ref)
        prepare_reference(spec, h.n_qubits)
    logger.info("Loaded %d-qubit Hamiltonian with %d terms", h.n_qubits, h.n_terms)
    return h, spec


def _threshold(args: argparse.Namespace) -> float:
    return args.threshold if args.threshold is not None else get_settings().peak_threshold


def _run_config(args: argparse.Namespace, **overrides) -> RunConfig:
    settings = get_settings()
    fields = dict(
        hamiltonian_path=args.hamiltonian,
        reference=args.ref,
        target_delta=args.delta,
        interval=args.interval,
        shots=args.shots,
        mode=SamplingMode(args.mode),
        threshold=_threshold(args),
        s0=getattr(args, "offset", None),
        seed=args.seed if args.seed is not None else settings.seed,
        out_dir=args.out,
        evaluator=args.evaluator or settings.evaluator,
        heuristic_bound=args.heuristic_bound,
    )
    fields.update(overrides)
    return RunConfig(**fields)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_plan(args: argparse.Namespace) -> int:
    """Print delta_max, the chosen interval, N, delta and the evaluation count."""

    timings: Dict[str, float] = {}
    with stage("plan", timings):
        if args.energy_bound is not None:
            bound = EnergyBound(value=args.energy_bound, source="user")
        elif args.hamiltonian is not None:
            h = _load_hamiltonian(args.hamiltonian)
            spec = ReferenceSpec.parse(args.ref) if args.ref else None
            bound = estimate_energy_bound(h, spec, heuristic=args.heuristic_bound)
        else:
            raise PlanError("either --energy-bound or --hamiltonian is required")

        plan = make_plan(
            args.delta,
            bound.value,
            requested_interval=args.interval,
            shots=args.shots,
            mode=SamplingMode(args.mode),
        )

    if args.json:
        print(plan.model_dump_json(indent=2))
    else:
        print(f"energy_bound  {bound.value:.10g} ({bound.source})")
        print(f"delta_max     {plan.delta_max:.10g}")
        print(f"interval      {plan.interval:.10g}")
        print(f"count         {plan.count}")
        print(f"t_max         {plan.t_max:.10g}")
        print(f"delta         {plan.delta:.10g}")
        print(f"evaluations   {plan.evaluations}")

    if args.out is not None:
        with stage("write", timings):
            out = _out_dir(args.out)
            io.write_model(out / "plan.json", plan)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    settings = get_settings()
    timings: Dict[str, float] = {}
    h, spec = _load_inputs(args, timings)

    with stage("plan", timings):
        bound = estimate_energy_bound(h, spec, heuristic=args.heuristic_bound)
        plan = make_plan(
            args.delta,
            bound.value,
            requested_interval=args.interval,
            shots=args.shots,
            mode=SamplingMode(args.mode),
        )

    with stage("sample", timings):
        signal = acquire_signal(
            h,
            spec,
            plan,
            evaluator=Evaluator(args.evaluator or settings.evaluator),
            seed=args.seed,
            workers=settings.workers,
        )

    with stage("write", timings):
        out = _out_dir(args.out)
        io.write_model(out / "plan.json", plan)
        io.write_signal_csv(out / "signal.csv", signal)

    print(f"{plan.count} samples ({plan.evaluations} evaluated) written to {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    timings: Dict[str, float] = {}
    with stage("load", timings):
        plan = io.read_plan(args.plan) if args.plan else None
        signal = io.read_signal_csv(args.signal, plan)

    with stage("analyze", timings):
        spectrum = transform(signal)
        estimates = detect_peaks(spectrum, _threshold(args), args.leakage_margin)

    with stage("write", timings):
        out = _out_dir(args.out)
        io.write_spectrum_csv(out / "spectrum.csv", spectrum)
        io.write_estimates(out / "estimates.json", estimates)

    print(f"a_0 = {spectrum.a0:.10f}")
    for estimate in estimates:
        print(f"k={estimate.bin:<8d} |E|={estimate.abs_energy:.10f}  a={estimate.amplitude:.8f}")
    return EXIT_OK


def cmd_resolve_sign(args: argparse.Namespace) -> int:
    timings: Dict[str, float] = {}
    h, spec = _load_inputs(args, timings)
    with stage("config", timings):
        config = _run_config(args, resolve_signs=True)

    artifacts = run_pipeline(h, spec, config, workers=get_settings().workers)
    resolution = artifacts.report.resolution

    if args.out is not None:
        with stage("write", timings):
            out = _out_dir(args.out)
            io.write_model(out / "resolution.json", resolution)
            io.write_estimates(out / "estimates.json", artifacts.report.estimates)
    print(resolution.model_dump_json(indent=2))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    timings: Dict[str, float] = {}
    h, spec = _load_inputs(args, timings)

    with stage("oracle", timings):
        decomposition = diagonalize(h)
        table = overlaps(decomposition, prepare_reference(spec, h.n_qubits))
        report = OracleReport(
            ground_energy=decomposition.ground_energy,
            l1_bound=l1_norm_bound(h),
            entries=[OracleEntry(energy=e.energy, weight=e.weight) for e in table.entries],
        )

    if args.out is not None:
        with stage("write", timings):
            out = _out_dir(args.out)
            io.write_model(out / "oracle.json", report)
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    """Full pipeline; exit 1 when an oracle line above threshold was missed."""

    timings: Dict[str, float] = {}
    h, spec = _load_inputs(args, timings)
    with stage("config", timings):
        config = _run_config(
            args,
            oracle=args.oracle,
            resolve_signs=not args.no_signs,
            assume_negative=args.assume_negative,
        )
        if args.excitations and not spec.is_basis:
            raise ReferenceStateError("--excitations needs a single-bitstring --ref")

    if args.excitations:
        return _run_excited(args, h, spec, config, timings)

    artifacts = run_pipeline(h, spec, config, workers=get_settings().workers)
    report = artifacts.report
    timings.update(artifacts.timings)

    if args.out is not None:
        with stage("write", timings):
            out = _out_dir(args.out)
            io.write_model(out / "plan.json", report.plan)
            io.write_signal_csv(out / "signal.csv", artifacts.signal)
            io.write_spectrum_csv(out / "spectrum.csv", artifacts.spectrum)
            io.write_estimates(out / "estimates.json", report.estimates)
            if report.resolution is not None:
                io.write_model(out / "resolution.json", report.resolution)
            io.write_model(out / "report.json", report)
        io.write_timings(out / "timings.json", timings)

    print(render_summary(report))
    if report.recovery is not None and not report.recovery.success:
        return EXIT_ORACLE_FAILED
    return EXIT_OK


def _run_excited(
    args: argparse.Namespace,
    h: Hamiltonian,
    spec: ReferenceSpec,
    config: RunConfig,
    timings: Dict[str, float],
) -> int:
    with stage("references", timings):
        specs = excited_references(spec.bitstring, args.excitations)

    report = run_references(h, specs, config, workers=get_settings().workers)

    if args.out is not None:
        with stage("write", timings):
            out = _out_dir(args.out)
            io.write_model(out / "references.json", report)
        io.write_timings(out / "timings.json", timings)

    print(render_references(report))
    return EXIT_OK if report.success else EXIT_ORACLE_FAILED


def cmd_sweep(args: argparse.Namespace) -> int:
    settings = get_settings()
    timings: Dict[str, float] = {}
    h, spec = _load_inputs(args, timings)
    evaluator = Evaluator(args.evaluator or settings.evaluator)

    with stage("sweep", timings):
        fixed = args.interval if args.vary == "t-max" else args.t_max
        if len(fixed) != 1:
            other = "--interval" if args.vary == "t-max" else "--t-max"
            raise PlanError(f"--vary {args.vary} takes exactly one {other}, got {len(fixed)}")

        if args.vary == "t-max":
            report = precision_sweep(
                h,
                spec,
                args.t_max,
                args.interval[0],
                _threshold(args),
                evaluator=evaluator,
                workers=settings.workers,
            )
        else:
            report = interval_sweep(
                h,
                spec,
                args.t_max[0],
                args.interval,
                _threshold(args),
                evaluator=evaluator,
                workers=settings.workers,
            )

    if args.out is not None:
        with stage("write", timings):
            out = _out_dir(args.out)
            io.write_model(out / "sweep.json", report)
    print(render_sweep(report))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "plan": cmd_plan,
    "sample": cmd_sample,
    "analyze": cmd_analyze,
    "resolve-sign": cmd_resolve_sign,
    "oracle": cmd_oracle,
    "run": cmd_run,
    "sweep": cmd_sweep,
}
