"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class VacuumEulerError(Exception):
    """Base class for every error raised by the package."""


class NoVacuumBoundary(VacuumEulerError):
    pass


class DisconnectedSupport(VacuumEulerError):
    pass


class OutOfDomain(VacuumEulerError):
    pass


class InsufficientResolution(VacuumEulerError):
    pass


class Unsupported(VacuumEulerError):
    pass


class InvalidIndices(VacuumEulerError):
    pass


class KernelConstructionFailed(VacuumEulerError):
    pass


class ResolutionTooCoarse(VacuumEulerError):
    pass


class DomainTooNarrow(VacuumEulerError):
    """Kernel reads would leave the gas domain."""


class FoldedFlow(VacuumEulerError):
    pass


class ContinuationViolation(VacuumEulerError):
    """Raised when a monitored continuation quantity leaves its admissible range."""

    def __init__(self, criterion: str, time: float, value: float):
        super().__init__(f"{criterion} violated at t={time!r}: value={value!r}")
        self.criterion = criterion
        self.time = time
        self.value = value

    def record(self) -> dict:
        return {"criterion": self.criterion, "time": self.time, "value": self.value}


class GridMismatch(VacuumEulerError):
    pass


class InvalidHistory(VacuumEulerError):
    pass


class DisjointDomains(VacuumEulerError):
    pass


class TimeGridMismatch(VacuumEulerError):
    pass


class OracleToleranceFailure(VacuumEulerError):
    pass


class ConfigError(VacuumEulerError):
    """Configuration problem; ``path`` is the dotted field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message
