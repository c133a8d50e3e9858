from datetime import datetime, timedelta

import numpy as np
import pytest

from stationfill.model import (
    UTC,
    Neighbour,
    NeighbourSet,
    StationMeta,
    StationSeries,
    Variable,
)

START = datetime(2014, 1, 1, tzinfo=UTC)


def make_series(
    values,
    station_id="tgt",
    variable=Variable.TEMPERATURE,
    start=START,
    cadence_min=15,
    null_slots=(),
):
    """Series from a list of floats/None (None = missing)."""
    return StationSeries(
        station_id=station_id,
        variable=variable,
        start=start,
        values=values,
        cadence=timedelta(minutes=cadence_min),
        null_slots=frozenset(null_slots),
    )


def make_neighbour_set(entries, variable=Variable.TEMPERATURE, target=None):
    """NeighbourSet from dicts: id, d_lon, d_lat, m_s, m_i (order = rank).

    Distances are synthesized ascending so the stored order is valid.
    """
    target = target or StationMeta("tgt", -2.0, 51.5)
    neighbours = []
    for i, e in enumerate(entries):
        neighbours.append(
            Neighbour(
                meta=StationMeta(
                    e["id"],
                    target.longitude + e["d_lon"],
                    target.latitude + e["d_lat"],
                ),
                distance_km=e.get("distance_km", float(i + 1)),
                d_lon=e["d_lon"],
                d_lat=e["d_lat"],
                mean_target=e["m_s"],
                mean_neighbour=e["m_i"],
                n_overlap=e.get("n_overlap", 10),
            )
        )
    return NeighbourSet(target=target, variable=variable, neighbours=tuple(neighbours))


@pytest.fixture
def rng():
    return np.random.default_rng(20140101)
