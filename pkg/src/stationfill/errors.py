"""Exception hierarchy for stationfill."""
from __future__ import annotations


class StationFillError(Exception):
    """Base class for all stationfill errors."""


# --- ingest ---------------------------------------------------------------

class IngestError(StationFillError):
    """Base class for CSV parsing and validation failures."""


class MalformedRow(IngestError):
    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason


class DuplicateStationId(IngestError):
    pass


class CoordinateOutOfRange(IngestError):
    pass


class OffGridTimestamp(IngestError):
    pass


class DuplicateSlot(IngestError):
    pass


class UnknownVariable(IngestError):
    pass


class UnparseableValue(IngestError):
    pass


# --- geo ------------------------------------------------------------------

class NoCandidates(StationFillError):
    """Fewer candidate stations than the requested neighbour count."""


class EmptyOverlap(StationFillError):
    """No neighbour shares any present slot with the target."""


# --- impute ---------------------------------------------------------------

class ImputationError(StationFillError):
    """Base class for per-slot imputation failures."""


class BoundaryMissing(ImputationError):
    """Gap touches the series edge or a bounding value is absent."""


class NoNeighbourData(ImputationError):
    """No neighbour has a present value at the requested slot."""


class ZeroNeighbourMean(ImputationError):
    """Every contributing neighbour has a zero sample mean (ratio undefined)."""


class NoFallbackMean(ImputationError):
    """Target has no present values in the fallback calendar month."""


class ZeroWeightSum(ImputationError):
    """Combined weights cancel to zero; the estimate is undefined."""


# --- eval -----------------------------------------------------------------

class LevelInfeasible(StationFillError):
    """The requested missingness mask cannot be placed on the series."""


class EmptyInput(StationFillError):
    """An operation that needs at least one element received none."""


class EmptyReport(StationFillError):
    """Plotting requires a report with at least one cell."""


# --- cli / pipeline -------------------------------------------------------

class ConfigError(StationFillError):
    """Invalid configuration or command-line arguments."""
