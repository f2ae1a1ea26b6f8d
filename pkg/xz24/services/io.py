"""On-disk formats: JSON for schema'd payloads, CSV for dense series.

Every writer goes through ``write_atomic`` so a crashed run never leaves a
half-written file behind.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, TypeAdapter

from ..core.errors import SpectralError
from ..models.schemas import EigenEstimate, SamplingMode, SamplingPlan
from .sampling import Signal
from .spectral import Spectrum

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SIGNAL_COLUMNS = ("n", "t", "q")
SPECTRUM_COLUMNS = ("k", "x", "energy", "a", "log10_abs_a")

PathLike = Union[str, Path]

_ESTIMATES = TypeAdapter(List[EigenEstimate])


def write_atomic(path: PathLike, text: str) -> Path:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        logger.error("Failed to write %s", path)
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug("Wrote %s", path)
    return path


def write_model(path: PathLike, model: BaseModel) -> Path:
    return write_atomic(path, model.model_dump_json(indent=2) + "\n")


def write_estimates(path: PathLike, estimates: List[EigenEstimate]) -> Path:
    return write_atomic(path, _ESTIMATES.dump_json(estimates, indent=2).decode("utf-8") + "\n")


def read_estimates(path: PathLike) -> List[EigenEstimate]:
    return _ESTIMATES.validate_json(Path(path).read_text(encoding="utf-8"))


def read_plan(path: PathLike) -> SamplingPlan:
    return SamplingPlan.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_timings(path: PathLike, timings: Dict[str, float]) -> Path:
    """Per-stage wall-clock seconds; kept out of report.json, which must not vary."""

    return write_atomic(path, json.dumps(timings, indent=2) + "\n")


def write_signal_csv(path: PathLike, signal: Signal) -> Path:
    """Columns n, t, q; the (t, q) pair is the time-domain plot series."""

    frame = pd.DataFrame(
        {
            "n": np.arange(signal.plan.count),
            "t": signal.times,
            "q": signal.values,
        }
    )
    return write_atomic(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT))


def _is_mirrored(values: np.ndarray) -> bool:
    return bool(np.array_equal(values[1:], values[:0:-1]))


def read_signal_csv(path: PathLike, plan: Optional[SamplingPlan] = None) -> Signal:
    """Load a signal written by ``write_signal_csv`` or produced elsewhere.

    Without a plan the grid is rebuilt from the file: interval = t[1],
    count = number of rows, and the mirror layout when q(n) == q(N - n)
    holds exactly.
    """

    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SpectralError(f"{path}: malformed signal CSV ({exc})") from exc

    missing = [column for column in ("t", "q") if column not in frame.columns]
    if missing:
        raise SpectralError(f"{path}: missing column(s) {', '.join(missing)}")
    if frame[["t", "q"]].isna().any().any():
        raise SpectralError(f"{path}: empty or non-numeric cells")
    try:
        times = frame["t"].to_numpy(dtype=float)
        values = frame["q"].to_numpy(dtype=float)
    except ValueError as exc:
        raise SpectralError(f"{path}: non-numeric signal values") from exc

    count = values.shape[0]
    if count < 3:
        raise SpectralError(f"{path}: need at least 3 samples, got {count}")
    if count % 2 == 0:
        raise SpectralError(f"{path}: sample count must be odd, got {count}")

    interval = float(times[1] - times[0])
    if interval <= 0:
        raise SpectralError(f"{path}: time column must be increasing")
    if not np.allclose(np.diff(times), interval, rtol=1e-9, atol=0.0):
        raise SpectralError(f"{path}: time grid is not uniform")

    if plan is None:
        mode = SamplingMode.MIRROR if _is_mirrored(values) else SamplingMode.FULL
        logger.debug("No plan for %s; rebuilt a %d-sample %s grid", path, count, mode.value)
        plan = SamplingPlan.from_grid(interval, count, mode=mode)
    elif plan.count != count:
        raise SpectralError(f"{path}: {count} samples but the plan expects {plan.count}")
    elif not np.isclose(interval, plan.interval, rtol=1e-9, atol=0.0):
        raise SpectralError(
            f"{path}: time spacing {interval:.10g} does not match the plan interval "
            f"{plan.interval:.10g}"
        )

    return Signal(plan=plan, values=values)


def write_spectrum_csv(path: PathLike, spectrum: Spectrum) -> Path:
    """Bins k = 0 .. (N-1)/2; (x, log10 |a|) is the spectrum plot series."""

    span = spectrum.plan.count * spectrum.plan.interval
    bins = np.arange(spectrum.coefficients.shape[0] + 1)
    amplitudes = np.concatenate([[spectrum.a0], spectrum.coefficients])
    with np.errstate(divide="ignore"):
        log_amplitudes = np.log10(np.abs(amplitudes))

    frame = pd.DataFrame(
        {
            "k": bins,
            "x": bins / span,
            "energy": 2.0 * np.pi * bins / span,
            "a": amplitudes,
            "log10_abs_a": log_amplitudes,
        }
    )
    return write_atomic(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT))


def read_spectrum_csv(path: PathLike) -> pd.DataFrame:
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [column for column in SPECTRUM_COLUMNS if column not in frame.columns]
    if missing:
        raise SpectralError(f"{path}: missing column(s) {', '.join(missing)}")
    return frame
