"""Fill methods: linear interpolation for short gaps; ratio (NR),
inverse-coordinate (GC), combined (NRGC) and nearest-neighbour cascade (NN)
estimators for long gaps.

Each estimator has a scalar form returning an :class:`ImputedValue` with
provenance, and a batch form over many slots at once; both run through the
same arithmetic core, so batch and scalar results are identical.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .errors import (
    BoundaryMissing,
    NoFallbackMean,
    NoNeighbourData,
    ZeroNeighbourMean,
    ZeroWeightSum,
)
from .model import (
    GapClass,
    GapSpan,
    ImputedValue,
    Method,
    NeighbourSet,
    StationSeries,
    Variable,
    clamp_for_variable,
)

#: Cascade depth of the nearest-neighbour method (closest three stations).
NN_CASCADE_DEPTH = 3


def slot_month_array(series: StationSeries) -> np.ndarray:
    """Calendar month (1-12) of every slot."""
    t0 = np.datetime64(series.start.replace(tzinfo=None), "s")
    step = np.timedelta64(int(series.cadence.total_seconds()), "s")
    times = t0 + np.arange(len(series)) * step
    return (times.astype("datetime64[M]").astype(np.int64) % 12 + 1).astype(np.int64)


def monthly_means(series: StationSeries) -> dict[int, float]:
    """Mean of present values per calendar month, pooled across years.

    Months with no present values are omitted.
    """
    months = slot_month_array(series)
    present = series.present_mask
    out: dict[int, float] = {}
    for m in range(1, 13):
        sel = present & (months == m)
        if sel.any():
            out[m] = float(series.values[sel].mean())
    return out


def linear_interpolate(series: StationSeries, gap: GapSpan) -> list[ImputedValue]:
    """Linearly interpolate a short gap between its two bounding values.

    Slot j of the gap (1-based) gets ``prev + j * (next - prev) / (L + 1)``,
    which reproduces any affine signal exactly.
    """
    if gap.kind is not GapClass.SHORT:
        raise ValueError("linear interpolation is for short gaps only")
    lo = gap.first_slot - 1
    hi = gap.first_slot + gap.length
    if lo < 0 or hi >= len(series):
        raise BoundaryMissing(
            f"gap at slot {gap.first_slot} touches the series edge"
        )
    prev = series.value_at(lo)
    nxt = series.value_at(hi)
    if prev is None or nxt is None:
        raise BoundaryMissing(f"gap at slot {gap.first_slot} lacks a bounding value")
    step = (nxt - prev) / (gap.length + 1)
    out = []
    for j in range(1, gap.length + 1):
        value, clamped = clamp_for_variable(prev + j * step, series.variable)
        out.append(
            ImputedValue(
                value=value,
                method=Method.LINEAR_INTERP,
                slot=gap.first_slot + j - 1,
                clamped=clamped,
            )
        )
    return out


# --- batch cores ------------------------------------------------------------


def nr_estimates(ns: NeighbourSet, obs_matrix: np.ndarray) -> np.ndarray:
    """Ratio estimator over a (n_neighbours, n_slots) observation matrix.

    Each column is one slot; NaN marks a neighbour with no value there.
    Neighbours with a zero sample mean are excluded; the divisor is the
    per-slot count of contributing neighbours. Columns with no contributor
    come back NaN.
    """
    usable = [i for i, nb in enumerate(ns.neighbours) if nb.mean_neighbour != 0.0]
    n_slots = obs_matrix.shape[1]
    if not usable:
        return np.full(n_slots, np.nan)
    ratios = np.array(
        [ns.neighbours[i].mean_target / ns.neighbours[i].mean_neighbour for i in usable]
    )
    v = obs_matrix[usable]
    present = ~np.isnan(v)
    total = np.where(present, ratios[:, None] * v, 0.0).sum(axis=0)
    count = present.sum(axis=0)
    return np.where(count > 0, total / np.maximum(count, 1), np.nan)


def weighted_estimates(
    ns: NeighbourSet, obs_matrix: np.ndarray, use_ratio: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse-squared-offset weighting (GC), optionally times the mean
    ratio (NRGC), normalized per slot over the contributing neighbours.

    A neighbour at zero offset from the target has undefined weight; where
    it is present its observation is returned directly and the slot is
    flagged degenerate. Returns (estimates, degenerate_mask); slots with no
    contributor or a zero weight sum come back NaN.
    """
    n_slots = obs_matrix.shape[1]
    est = np.full(n_slots, np.nan)
    handled = np.zeros(n_slots, dtype=bool)
    for i, nb in enumerate(ns.neighbours):
        if nb.offset_sq == 0.0:
            p = ~np.isnan(obs_matrix[i]) & ~handled
            est[p] = obs_matrix[i][p]
            handled[p] = True
    degenerate = handled.copy()
    rows = [
        i
        for i, nb in enumerate(ns.neighbours)
        if nb.offset_sq != 0.0 and (not use_ratio or nb.mean_neighbour != 0.0)
    ]
    if rows:
        base = np.array(
            [
                (1.0 / ns.neighbours[i].offset_sq)
                * (
                    ns.neighbours[i].mean_target / ns.neighbours[i].mean_neighbour
                    if use_ratio
                    else 1.0
                )
                for i in rows
            ]
        )
        v = obs_matrix[rows]
        present = ~np.isnan(v)
        weights = np.where(present, base[:, None], 0.0)
        denom = weights.sum(axis=0)
        numer = np.where(present, weights * v, 0.0).sum(axis=0)
        ok = ~handled & present.any(axis=0) & (denom != 0.0)
        est[ok] = numer[ok] / denom[ok]
    return est, degenerate


def nn_estimates(
    ns: NeighbourSet,
    obs_matrix: np.ndarray,
    months: np.ndarray,
    fallback_means: Mapping[int, float],
    depth: int = NN_CASCADE_DEPTH,
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-neighbour cascade with long-term monthly-mean fallback.

    Walks the nearest ``depth`` neighbours in distance order and transfers
    the first present value unchanged; slots none of them cover get the
    target's long-term mean for their calendar month. Returns
    (estimates, source) where source is the neighbour row index, -2 for the
    monthly fallback, and -1 where nothing could fill the slot.
    """
    n_slots = obs_matrix.shape[1]
    est = np.full(n_slots, np.nan)
    source = np.full(n_slots, -1, dtype=np.int64)
    for i in range(min(depth, len(ns.neighbours))):
        p = ~np.isnan(obs_matrix[i]) & (source == -1)
        est[p] = obs_matrix[i][p]
        source[p] = i
    rest = source == -1
    if rest.any():
        means = np.array(
            [fallback_means.get(int(m), np.nan) for m in months[rest]]
        )
        est[rest] = means
        source[rest] = np.where(np.isnan(means), -1, -2)
    return est, source


def normalized_weights(
    ns: NeighbourSet, observations: Mapping[str, float], use_ratio: bool
) -> dict[str, float]:
    """The normalized per-neighbour weights behind the GC/NRGC estimate.

    Raises on coincident neighbours (their weight is not finite) and mirrors
    the contributor filtering of the estimators; the returned weights sum
    to 1 and satisfy ``estimate == sum(w[id] * obs[id])``.
    """
    entries: list[tuple[str, float]] = []
    for nb in ns.neighbours:
        if nb.station_id not in observations:
            continue
        if nb.offset_sq == 0.0:
            raise ValueError(f"{nb.station_id} is coincident with the target")
        if use_ratio and nb.mean_neighbour == 0.0:
            continue
        w = 1.0 / nb.offset_sq
        if use_ratio:
            w *= nb.mean_target / nb.mean_neighbour
        entries.append((nb.station_id, w))
    if not entries:
        raise NoNeighbourData("no contributing neighbour")
    total = sum(w for _, w in entries)
    if total == 0.0:
        raise ZeroWeightSum("weights cancel")
    return {sid: w / total for sid, w in entries}


# --- scalar forms -----------------------------------------------------------


def _obs_column(ns: NeighbourSet, observations: Mapping[str, float]) -> np.ndarray:
    col = np.full((len(ns.neighbours), 1), np.nan)
    for i, nb in enumerate(ns.neighbours):
        if nb.station_id in observations:
            col[i, 0] = observations[nb.station_id]
    return col


def _present_ids(ns: NeighbourSet, observations: Mapping[str, float]) -> list[str]:
    return [nb.station_id for nb in ns.neighbours if nb.station_id in observations]


def impute_nr(
    ns: NeighbourSet, slot: int, observations: Mapping[str, float]
) -> ImputedValue:
    """Estimate a missing value as the mean of ratio-scaled neighbour values."""
    if not _present_ids(ns, observations):
        raise NoNeighbourData(f"no neighbour value at slot {slot}")
    contributing = [
        nb.station_id
        for nb in ns.neighbours
        if nb.station_id in observations and nb.mean_neighbour != 0.0
    ]
    if not contributing:
        raise ZeroNeighbourMean(
            f"every neighbour with data at slot {slot} has a zero sample mean"
        )
    est = float(nr_estimates(ns, _obs_column(ns, observations))[0])
    value, clamped = clamp_for_variable(est, ns.variable)
    return ImputedValue(value, Method.NR, slot, tuple(contributing), clamped)


def _weighted_scalar(
    ns: NeighbourSet,
    slot: int,
    observations: Mapping[str, float],
    use_ratio: bool,
    method: Method,
) -> ImputedValue:
    if not _present_ids(ns, observations):
        raise NoNeighbourData(f"no neighbour value at slot {slot}")
    est_arr, degen = weighted_estimates(ns, _obs_column(ns, observations), use_ratio)
    if degen[0]:
        coincident = next(
            nb.station_id
            for nb in ns.neighbours
            if nb.offset_sq == 0.0 and nb.station_id in observations
        )
        value, clamped = clamp_for_variable(observations[coincident], ns.variable)
        return ImputedValue(value, method, slot, (coincident,), clamped, degenerate=True)
    contributing = [
        nb.station_id
        for nb in ns.neighbours
        if nb.station_id in observations
        and nb.offset_sq != 0.0
        and (not use_ratio or nb.mean_neighbour != 0.0)
    ]
    if use_ratio and not contributing:
        raise ZeroNeighbourMean(
            f"every neighbour with data at slot {slot} has a zero sample mean"
        )
    est = float(est_arr[0])
    if np.isnan(est):
        raise ZeroWeightSum(f"weights cancel at slot {slot}")
    value, clamped = clamp_for_variable(est, ns.variable)
    return ImputedValue(value, method, slot, tuple(contributing), clamped)


def impute_gc(
    ns: NeighbourSet, slot: int, observations: Mapping[str, float]
) -> ImputedValue:
    """Estimate a missing value by inverse-squared coordinate-offset weighting."""
    return _weighted_scalar(ns, slot, observations, use_ratio=False, method=Method.GC)


def impute_nrgc(
    ns: NeighbourSet, slot: int, observations: Mapping[str, float]
) -> ImputedValue:
    """Combined estimator: inverse-offset weights scaled by the mean ratio."""
    return _weighted_scalar(ns, slot, observations, use_ratio=True, method=Method.NRGC)


def impute_nn(
    ns: NeighbourSet,
    slot: int,
    observations: Mapping[str, float],
    month: int,
    fallback_means: Mapping[int, float],
    depth: int = NN_CASCADE_DEPTH,
) -> ImputedValue:
    """Transfer the closest available neighbour value, falling back to the
    target's long-term mean for the slot's calendar month."""
    for nb in ns.neighbours[:depth]:
        if nb.station_id in observations:
            value, clamped = clamp_for_variable(
                observations[nb.station_id], ns.variable
            )
            return ImputedValue(value, Method.NN, slot, (nb.station_id,), clamped)
    mean = fallback_means.get(month)
    if mean is None or np.isnan(mean):
        raise NoFallbackMean(f"no long-term mean for month {month}")
    value, clamped = clamp_for_variable(float(mean), ns.variable)
    return ImputedValue(value, Method.LONG_TERM_MEAN, slot, (), clamped)
