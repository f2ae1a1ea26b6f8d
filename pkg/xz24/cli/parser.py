"""Argument parser for the ``xz24`` command."""

from __future__ import annotations

import argparse

from ..models.schemas import SamplingMode
from ..services.simulator import Evaluator


def _add_input_arguments(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument(
        "--hamiltonian",
        required=required,
        help="Pauli-sum file, one 'coefficient P0 P1 ...' term per line.",
    )
    parser.add_argument(
        "--ref",
        required=required,
        help="Reference state: a bitstring such as 0011, or @file of 'bits amplitude' lines.",
    )


def _add_plan_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--delta", type=float, required=True, help="Target frequency quantum (energy resolution)."
    )
    parser.add_argument(
        "--interval", type=float, default=None, help="Requested sampling interval; Nyquist-checked."
    )
    parser.add_argument(
        "--shots", type=int, default=None, help="Ancilla readouts per point; omit for exact mode."
    )
    parser.add_argument(
        "--mode",
        choices=[mode.value for mode in SamplingMode],
        default=SamplingMode.MIRROR.value,
        help="mirror evaluates (N+1)/2 points and reflects the rest.",
    )
    parser.add_argument(
        "--heuristic-bound",
        action="store_true",
        help="Plan with |<ref|H|ref>| instead of the l1 bound (may alias).",
    )


def _add_execution_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Shot-noise seed.")
    parser.add_argument(
        "--evaluator",
        choices=[evaluator.value for evaluator in Evaluator],
        default=None,
        help="circuit simulates the ancilla register, direct reads <psi|exp(-iHt)|psi>.",
    )


def _add_threshold(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threshold", type=float, default=None, help="Minimum peak amplitude a_k."
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO logs, -vv for DEBUG."
    )

    parser = argparse.ArgumentParser(
        prog="xz24",
        description="Eigenvalues and overlaps from cos(Ht) sampling and a DFT.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    plan = commands.add_parser("plan", parents=[common], help="Choose interval and sample count.")
    _add_input_arguments(plan, required=False)
    plan.add_argument(
        "--energy-bound", type=float, default=None, help="|E|max to plan with, skips --hamiltonian."
    )
    _add_plan_arguments(plan)
    plan.add_argument("--json", action="store_true", help="Print the plan as JSON.")
    plan.add_argument("--out", default=None, help="Directory for plan.json.")

    sample = commands.add_parser("sample", parents=[common], help="Acquire q(n) on the grid.")
    _add_input_arguments(sample)
    _add_plan_arguments(sample)
    _add_execution_arguments(sample)
    sample.add_argument("--out", required=True, help="Directory for plan.json and signal.csv.")

    analyze = commands.add_parser("analyze", parents=[common], help="Transform a signal CSV.")
    analyze.add_argument("signal", help="CSV with columns t and q (and optionally n).")
    analyze.add_argument("--plan", default=None, help="plan.json written alongside the signal.")
    _add_threshold(analyze)
    analyze.add_argument(
        "--leakage-margin",
        type=float,
        default=None,
        help="Multiple of predicted sidelobe leakage a peak must exceed; 0 keeps all maxima.",
    )
    analyze.add_argument("--out", required=True, help="Output directory.")

    resolve = commands.add_parser(
        "resolve-sign", parents=[common], help="Resolve eigenvalue signs with an energy offset."
    )
    _add_input_arguments(resolve)
    _add_plan_arguments(resolve)
    _add_execution_arguments(resolve)
    _add_threshold(resolve)
    resolve.add_argument("--offset", type=float, default=None, help="Offset s0.")
    resolve.add_argument("--out", default=None, help="Directory for resolution.json.")

    oracle = commands.add_parser("oracle", parents=[common], help="Exact eigenvalues and overlaps.")
    _add_input_arguments(oracle)
    oracle.add_argument("--out", default=None, help="Directory for oracle.json.")

    run = commands.add_parser("run", parents=[common], help="Full pipeline, optional oracle.")
    _add_input_arguments(run)
    _add_plan_arguments(run)
    _add_execution_arguments(run)
    _add_threshold(run)
    run.add_argument("--offset", type=float, default=None, help="Offset s0.")
    run.add_argument("--oracle", action="store_true", help="Compare against dense diagonalization.")
    signs = run.add_mutually_exclusive_group()
    signs.add_argument(
        "--assume-negative", action="store_true", help="Report every energy as -|E|."
    )
    signs.add_argument("--no-signs", action="store_true", help="Skip the offset rerun.")
    run.add_argument(
        "--excitations",
        type=int,
        choices=[0, 1, 2],
        default=0,
        help="Also run every single (1) or single and double (2) excitation of --ref.",
    )
    run.add_argument("--out", default=None, help="Directory for all run artifacts.")

    sweep = commands.add_parser(
        "sweep",
        parents=[common],
        help="Recovery error against t_max (fixed interval) or the interval (fixed t_max).",
    )
    _add_input_arguments(sweep)
    sweep.add_argument(
        "--vary",
        choices=["t-max", "interval"],
        default="t-max",
        help="Which parameter takes several values; the other must be given once.",
    )
    sweep.add_argument(
        "--interval",
        type=float,
        action="append",
        required=True,
        help="Sampling interval; repeat for each point when sweeping the interval.",
    )
    sweep.add_argument(
        "--t-max",
        type=float,
        action="append",
        required=True,
        dest="t_max",
        help="Total evolution time; repeat for each point when sweeping t_max.",
    )
    _add_threshold(sweep)
    sweep.add_argument(
        "--evaluator",
        choices=[evaluator.value for evaluator in Evaluator],
        default=None,
    )
    sweep.add_argument("--out", default=None, help="Directory for sweep.json.")

    return parser
