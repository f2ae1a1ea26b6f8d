"""Exception types raised across the pipeline."""

from __future__ import annotations

from typing import Optional


class XZ24Error(Exception):
    """Root of every error the library raises on purpose."""


class HamiltonianParseError(XZ24Error, ValueError):
    """A Hamiltonian file line could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class DimensionCapError(XZ24Error, ValueError):
    """The register is too large for a dense matrix."""


class ReferenceStateError(XZ24Error, ValueError):
    """A reference specification cannot produce a normalized state."""


class PlanError(XZ24Error, ValueError):
    """Sampling parameters are inconsistent or violate Nyquist."""


class SpectralError(XZ24Error, ValueError):
    """A signal cannot be transformed."""


class SignResolutionError(XZ24Error, ValueError):
    """The offset cannot resolve peak shifts on this plan."""


class StageError(XZ24Error):
    """A pipeline stage failed; keeps the stage name for the exit message."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
