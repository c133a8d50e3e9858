"""Domain types shared by every other module. No I/O, no algorithms.

Missing observations are represented as NaN inside an immutable float64
array plus an explicit presence mask; NaN is not a valid measurement, so
it can never be mistaken for data. Slots that were recorded as a literal
``null`` at ingest are tracked separately in ``StationSeries.null_slots``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .errors import CoordinateOutOfRange

#: Default observation cadence (the record spacing all defaults assume).
DEFAULT_CADENCE = timedelta(minutes=15)

#: Gaps strictly shorter than one hour are Short, everything else Long.
SHORT_GAP_LIMIT = timedelta(hours=1)

UTC = timezone.utc


class Variable(Enum):
    """Observed quantity: air temperature (degC) or rainfall (mm per slot)."""

    TEMPERATURE = "temperature"
    RAINFALL = "rainfall"

    def __str__(self) -> str:
        return self.value


class Method(Enum):
    """Fill method identity attached to every imputed value."""

    LINEAR_INTERP = "linear"
    NR = "nr"
    GC = "gc"
    NRGC = "nrgc"
    NN = "nn"
    LONG_TERM_MEAN = "long_term_mean"

    def __str__(self) -> str:
        return self.value


#: Methods usable for long gaps (and for the benchmark harness).
NEIGHBOUR_METHODS = (Method.NR, Method.GC, Method.NRGC, Method.NN)


class GapClass(Enum):
    SHORT = "short"
    LONG = "long"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class StationMeta:
    """Identity and geographic position of one station."""

    station_id: str
    longitude: float
    latitude: float
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.station_id:
            raise ValueError("station_id must be nonempty")
        if not -180.0 <= self.longitude <= 180.0:
            raise CoordinateOutOfRange(
                f"longitude {self.longitude} outside [-180, 180] for {self.station_id!r}"
            )
        if not -90.0 <= self.latitude <= 90.0:
            raise CoordinateOutOfRange(
                f"latitude {self.latitude} outside [-90, 90] for {self.station_id!r}"
            )

    @property
    def lonlat(self) -> tuple[float, float]:
        return (self.longitude, self.latitude)


def _as_value_array(values: Iterable[Optional[float]]) -> np.ndarray:
    if isinstance(values, np.ndarray) and values.dtype == np.float64:
        arr = values.copy()
    else:
        arr = np.array(
            [np.nan if v is None else float(v) for v in values], dtype=np.float64
        )
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class StationSeries:
    """Cadence-aligned observations for one station and one variable.

    Slot ``i`` corresponds to ``start + i * cadence``; the index has no
    holes, so missingness is always explicit (a NaN slot), never structural.
    """

    station_id: str
    variable: Variable
    start: datetime
    values: np.ndarray
    cadence: timedelta = DEFAULT_CADENCE
    null_slots: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.cadence <= timedelta(0):
            raise ValueError("cadence must be positive")
        if self.start.tzinfo is None:
            raise ValueError("series start must be timezone-aware (UTC)")
        object.__setattr__(self, "start", self.start.astimezone(UTC))
        object.__setattr__(self, "values", _as_value_array(self.values))
        bad = [i for i in self.null_slots if i >= len(self.values) or i < 0
               or not np.isnan(self.values[i])]
        if bad:
            raise ValueError(f"null_slots {bad} are not missing slots")
        object.__setattr__(self, "null_slots", frozenset(self.null_slots))

    # -- structure ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.values)

    @property
    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def present_count(self) -> int:
        return int(self.present_mask.sum())

    def value_at(self, slot: int) -> Optional[float]:
        v = self.values[slot]
        return None if np.isnan(v) else float(v)

    def slot_time(self, slot: int) -> datetime:
        return self.start + slot * self.cadence

    def slot_month(self, slot: int) -> int:
        return self.slot_time(slot).month

    def times(self) -> list[datetime]:
        return [self.slot_time(i) for i in range(len(self))]

    # -- derived copies ----------------------------------------------------

    def with_values(
        self, values: np.ndarray, null_slots: Optional[frozenset[int]] = None
    ) -> "StationSeries":
        return replace(
            self,
            values=values,
            null_slots=frozenset() if null_slots is None else null_slots,
        )

    # -- equality (NaN-aware, used heavily by round-trip tests) -------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StationSeries):
            return NotImplemented
        return (
            self.station_id == other.station_id
            and self.variable == other.variable
            and self.start == other.start
            and self.cadence == other.cadence
            and self.null_slots == other.null_slots
            and len(self.values) == len(other.values)
            and bool(np.array_equal(self.values, other.values, equal_nan=True))
        )

    def __hash__(self) -> int:
        return hash((self.station_id, self.variable, self.start, self.cadence))


def classify_gap(length: int, cadence: timedelta) -> GapClass:
    """Short iff the gap spans strictly less than one hour."""
    if length < 1:
        raise ValueError("gap length must be >= 1")
    return GapClass.SHORT if length * cadence < SHORT_GAP_LIMIT else GapClass.LONG


@dataclass(frozen=True)
class GapSpan:
    """A maximal run of consecutive missing slots."""

    first_slot: int
    length: int
    kind: GapClass

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("gap length must be >= 1")

    @property
    def slots(self) -> range:
        return range(self.first_slot, self.first_slot + self.length)


@dataclass(frozen=True)
class Neighbour:
    """One ranked neighbour of a target station.

    ``mean_target`` / ``mean_neighbour`` are the sample means of the target
    and this neighbour over their pairwise-overlap window (the slots where
    both have present values).
    """

    meta: StationMeta
    distance_km: float
    d_lon: float
    d_lat: float
    mean_target: float
    mean_neighbour: float
    n_overlap: int

    @property
    def station_id(self) -> str:
        return self.meta.station_id

    @property
    def offset_sq(self) -> float:
        return self.d_lon * self.d_lon + self.d_lat * self.d_lat


@dataclass(frozen=True)
class NeighbourSet:
    """Target station plus its ranked neighbours for one variable.

    ``neighbours`` is sorted ascending by distance (ties by station_id);
    its length is the T of the ratio estimator and the N of the weighted
    ones. ``excluded`` lists candidate ids dropped for having no overlap
    with the target.
    """

    target: StationMeta
    variable: Variable
    neighbours: tuple[Neighbour, ...]
    excluded: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        ids = [n.station_id for n in self.neighbours]
        if self.target.station_id in ids:
            raise ValueError("target must not appear among its neighbours")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate neighbour station_id")

    def __len__(self) -> int:
        return len(self.neighbours)


@dataclass(frozen=True)
class ImputedValue:
    """A filled slot with full provenance."""

    value: float
    method: Method
    slot: int
    contributing_stations: tuple[str, ...] = ()
    clamped: bool = False
    degenerate: bool = False


def clamp_for_variable(
    value: float, variable: Variable
) -> tuple[float, bool]:
    """Rainfall is physically nonnegative; clamp and report whether we did."""
    if variable is Variable.RAINFALL and value < 0.0:
        return 0.0, True
    return value, False
