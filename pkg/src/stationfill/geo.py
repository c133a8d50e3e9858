"""Distances, offsets, and ranked neighbour sets with pairwise sample means."""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyOverlap, NoCandidates
from .model import Neighbour, NeighbourSet, StationMeta, StationSeries

#: Mean Earth radius used throughout, km.
EARTH_RADIUS_KM = 6371.0


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lon, lat) points in degrees."""
    lon1, lat1 = math.radians(a[0]), math.radians(a[1])
    lon2, lat2 = math.radians(b[0]), math.radians(b[1])
    s_lat = math.sin((lat2 - lat1) / 2.0)
    s_lon = math.sin((lon2 - lon1) / 2.0)
    h = s_lat * s_lat + math.cos(lat1) * math.cos(lat2) * s_lon * s_lon
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def pairwise_overlap_means(
    target: StationSeries, neighbour: StationSeries
) -> tuple[float, float, int]:
    """Sample means of target and neighbour over the slots where BOTH are present.

    Returns (mean_target, mean_neighbour, n_overlap); n_overlap == 0 means
    the two series share no data and the means are undefined (NaN).
    """
    n = min(len(target), len(neighbour))
    both = target.present_mask[:n] & neighbour.present_mask[:n]
    k = int(both.sum())
    if k == 0:
        return math.nan, math.nan, 0
    return (
        float(target.values[:n][both].mean()),
        float(neighbour.values[:n][both].mean()),
        k,
    )


def _pearson(target: StationSeries, neighbour: StationSeries) -> float:
    """Correlation over the pairwise overlap; -inf when undefined."""
    n = min(len(target), len(neighbour))
    both = target.present_mask[:n] & neighbour.present_mask[:n]
    if int(both.sum()) < 2:
        return -math.inf
    x = target.values[:n][both]
    y = neighbour.values[:n][both]
    if x.std() == 0.0 or y.std() == 0.0:
        return -math.inf
    return float(np.corrcoef(x, y)[0, 1])


def build_neighbour_set(
    target: StationMeta,
    candidates: Sequence[StationMeta],
    series: Mapping[str, StationSeries],
    k: int = 2,
    rank: str = "geometric",
) -> NeighbourSet:
    """Select the k nearest candidates and compute their pairwise means.

    ``series`` maps station_id -> StationSeries for a single variable and
    must cover the target and every candidate. Ranking is by haversine
    distance ascending (``rank="geometric"``, the default) or by Pearson
    correlation with the target descending (``rank="correlation"``); ties
    break by station_id. Candidates whose overlap with the target is empty
    are dropped and reported in ``NeighbourSet.excluded``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if rank not in ("geometric", "correlation"):
        raise ValueError(f"unknown rank mode {rank!r}")
    pool = [c for c in candidates if c.station_id != target.station_id]
    if k > len(pool):
        raise NoCandidates(
            f"requested {k} neighbours but only {len(pool)} candidates"
        )
    target_series = series[target.station_id]

    if rank == "geometric":
        pool.sort(key=lambda c: (haversine_km(target.lonlat, c.lonlat), c.station_id))
    else:
        pool.sort(
            key=lambda c: (-_pearson(target_series, series[c.station_id]), c.station_id)
        )

    chosen: list[Neighbour] = []
    excluded: list[str] = []
    for cand in pool:
        if len(chosen) == k:
            break
        m_s, m_i, n_overlap = pairwise_overlap_means(
            target_series, series[cand.station_id]
        )
        if n_overlap == 0:
            excluded.append(cand.station_id)
            continue
        chosen.append(
            Neighbour(
                meta=cand,
                distance_km=haversine_km(target.lonlat, cand.lonlat),
                d_lon=cand.longitude - target.longitude,
                d_lat=cand.latitude - target.latitude,
                mean_target=m_s,
                mean_neighbour=m_i,
                n_overlap=n_overlap,
            )
        )
    if not chosen:
        raise EmptyOverlap(
            f"no candidate shares any present slot with {target.station_id!r}"
        )
    if rank == "correlation":
        # keep the stored ordering invariant: ascending by distance, then id
        chosen.sort(key=lambda n: (n.distance_km, n.station_id))
    return NeighbourSet(
        target=target,
        variable=target_series.variable,
        neighbours=tuple(chosen),
        excluded=tuple(excluded),
    )
