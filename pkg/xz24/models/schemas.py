"""Typed payloads written to disk and passed between pipeline stages."""

from __future__ import annotations

import math
from enum import Enum
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

TWO_PI = 2.0 * math.pi


class SamplingMode(str, Enum):
    MIRROR = "mirror"
    FULL = "full"


class Sign(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    AMBIGUOUS = "ambiguous"
    UNKNOWN = "unknown"


class SamplingPlan(BaseModel):
    """Uniform time grid t_n = n * interval, n = 0 .. count-1."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0, description="Frequency quantum 2*pi/(count*interval).")
    interval: float = Field(..., gt=0, description="Sampling interval in time units.")
    count: int = Field(..., ge=3, description="Number of samples N (odd).")
    t_max: float = Field(..., gt=0, description="count * interval.")
    mode: SamplingMode = SamplingMode.MIRROR
    shots: Optional[int] = Field(default=None, ge=1)
    energy_bound: float = Field(..., gt=0, description="|E|max used for the Nyquist check.")

    @model_validator(mode="after")
    def _check_grid(self) -> "SamplingPlan":
        if self.count % 2 == 0:
            raise ValueError(f"count must be odd, got {self.count}")
        if abs(self.delta * self.interval * self.count - TWO_PI) > 1e-12:
            raise ValueError("delta * interval * count must equal 2*pi")
        if abs(self.t_max - self.count * self.interval) > 1e-9 * self.t_max:
            raise ValueError("t_max must equal count * interval")
        if self.interval * self.energy_bound > math.pi * (1 + 1e-12):
            raise ValueError(
                f"interval {self.interval} exceeds the Nyquist limit "
                f"{math.pi / self.energy_bound} for energy bound {self.energy_bound}"
            )
        return self

    @classmethod
    def from_grid(
        cls,
        interval: float,
        count: int,
        mode: SamplingMode = SamplingMode.FULL,
        energy_bound: Optional[float] = None,
        shots: Optional[int] = None,
    ) -> "SamplingPlan":
        """Plan describing an existing grid; the bound defaults to what Nyquist allows."""

        return cls(
            delta=TWO_PI / (count * interval),
            interval=interval,
            count=count,
            t_max=count * interval,
            mode=mode,
            shots=shots,
            energy_bound=energy_bound if energy_bound is not None else math.pi / interval,
        )

    @property
    def delta_max(self) -> float:
        """Largest Nyquist-safe interval for this plan's energy bound."""
        return math.pi / self.energy_bound

    @property
    def evaluations(self) -> int:
        if self.mode is SamplingMode.MIRROR:
            return (self.count + 1) // 2
        return self.count

    @property
    def half_count(self) -> int:
        """Number of positive-frequency bins, (N-1)/2."""
        return (self.count - 1) // 2

    def times(self) -> np.ndarray:
        return np.arange(self.count) * self.interval


class EnergyBound(BaseModel):
    value: float = Field(..., gt=0)
    heuristic: bool = False
    source: str = Field(..., description="l1 or basis-expectation")


class EigenEstimate(BaseModel):
    """One spectral peak read back as an energy magnitude and an overlap."""

    model_config = ConfigDict(frozen=True)

    bin: int = Field(..., ge=1)
    x: float = Field(..., description="k / (N * interval), cycles per time unit.")
    abs_energy: float = Field(..., ge=0)
    amplitude: float = Field(..., description="a_k, approximates the overlap weight.")
    sign: Sign = Sign.UNKNOWN
    energy: Optional[float] = None


class SignPair(BaseModel):
    base_abs_energy: float
    shifted_abs_energy: Optional[float] = None
    shift: Optional[float] = None
    sign: Sign
    signed_energy: Optional[float] = None


class SignResolution(BaseModel):
    s0: float
    pairs: List[SignPair] = Field(default_factory=list)
    unmatched_shifted: List[float] = Field(
        default_factory=list, description="Shifted peaks no base peak claimed."
    )


class OracleEntry(BaseModel):
    energy: float
    weight: float


class OracleReport(BaseModel):
    ground_energy: float
    l1_bound: float
    entries: List[OracleEntry]


class LevelMatch(BaseModel):
    """One oracle line (merged by |E|) and the closest estimate."""

    abs_energy: float
    weight: float
    signed_energies: List[float]
    required: bool = Field(..., description="weight >= threshold")
    estimate_abs_energy: Optional[float] = None
    error: Optional[float] = None
    recovered: bool = False


class EstimateMatch(BaseModel):
    bin: int
    abs_energy: float
    nearest_oracle_abs_energy: float
    error: float


class HamiltonianSummary(BaseModel):
    n_qubits: int
    n_terms: int
    l1_bound: float


class RecoveryReport(BaseModel):
    hamiltonian: HamiltonianSummary
    delta: float
    threshold: float
    levels: List[LevelMatch]
    estimates: List[EstimateMatch]
    max_error: Optional[float] = None
    missed: List[float] = Field(default_factory=list)
    success: bool


class RunConfig(BaseModel):
    """Everything needed to rerun a pipeline invocation."""

    hamiltonian_path: str
    reference: str
    target_delta: float = Field(..., gt=0)
    interval: Optional[float] = Field(default=None, gt=0)
    shots: Optional[int] = Field(default=None, ge=1)
    mode: SamplingMode = SamplingMode.MIRROR
    threshold: float = Field(..., gt=0)
    s0: Optional[float] = Field(default=None, ge=0)
    seed: int = 0
    out_dir: Optional[str] = None
    evaluator: str = "circuit"
    heuristic_bound: bool = False
    oracle: bool = False
    resolve_signs: bool = True
    assume_negative: bool = False


class RunReport(BaseModel):
    config: RunConfig
    hamiltonian: HamiltonianSummary
    energy_bound: EnergyBound
    plan: SamplingPlan
    dc_amplitude: float = Field(..., description="a_0; never reported as an eigenvalue.")
    estimates: List[EigenEstimate]
    resolution: Optional[SignResolution] = None
    recovery: Optional[RecoveryReport] = None
    timings: Dict[str, float] = Field(default_factory=dict, exclude=True)


class SweepPoint(BaseModel):
    t_max: float
    delta: float
    interval: float
    count: int
    max_error: Optional[float] = None
    n_estimates: int
    aliased: bool = Field(default=False, description="interval beyond pi / max|E|")


class SweepReport(BaseModel):
    """Recovery error against t_max (fixed interval) or against the interval (fixed t_max)."""

    varied: Literal["t_max", "interval"] = "t_max"
    threshold: float
    points: List[SweepPoint]
    nyquist_interval: Optional[float] = Field(
        default=None, description="pi / max|E| of the exact spectrum."
    )
    fit_coefficient: Optional[float] = None
    fit_exponent: Optional[float] = None


class MergedLine(BaseModel):
    """One spectral line seen from one or more reference states."""

    abs_energy: float
    energy: Optional[float] = None
    sign: Sign = Sign.UNKNOWN
    amplitude: float = Field(..., description="Largest a_k among the runs that found it.")
    references: List[str]


class MultiReferenceReport(BaseModel):
    hamiltonian: HamiltonianSummary
    delta: float
    runs: List[RunReport]
    lines: List[MergedLine]
    success: bool
