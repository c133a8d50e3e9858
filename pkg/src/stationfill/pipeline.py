"""End-to-end fill workflow: ingest and validate, detect gaps, interpolate
short gaps, fill long gaps from neighbouring stations, and emit the filled
dataset with a provenance sidecar.

Ordering rules: short gaps are interpolated first, but neighbour methods
only ever read original (pre-fill) neighbour values, so fills can never
cascade errors into each other. Gaps touching a series edge are routed to
the long-gap method regardless of length.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyOverlap,
    ImputationError,
    NoCandidates,
)
from .evaluate import DEFAULT_LEVELS, derive_cell_seed, MaskPattern
from .geo import build_neighbour_set
from .impute import (
    NN_CASCADE_DEPTH,
    impute_gc,
    impute_nn,
    impute_nr,
    impute_nrgc,
    linear_interpolate,
    monthly_means,
    slot_month_array,
)
from .ingest import (
    DEFAULT_BOUNDS,
    ValidationReport,
    detect_gaps,
    format_timestamp,
    parse_observations,
    parse_station_meta,
    validate,
    write_observations,
)
from .model import (
    DEFAULT_CADENCE,
    GapClass,
    ImputedValue,
    Method,
    NEIGHBOUR_METHODS,
    NeighbourSet,
    StationMeta,
    StationSeries,
    Variable,
)

_SCALAR_IMPUTERS = {
    Method.NR: impute_nr,
    Method.GC: impute_gc,
    Method.NRGC: impute_nrgc,
}

#: Method used when auto-selection has no usable window to benchmark on.
AUTO_FALLBACK_METHOD = Method.NRGC

#: Smallest fully-present window the auto-selector will benchmark on.
AUTO_MIN_WINDOW = 16


@dataclass(frozen=True)
class PipelineConfig:
    obs_path: Path
    meta_path: Path
    cadence: timedelta = DEFAULT_CADENCE
    method: Optional[Method] = None  # None = auto-select per (station, variable)
    neighbour_k: int = 2
    rank: str = "geometric"
    bounds: Mapping[Variable, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_BOUNDS)
    )
    treat_out_of_bounds_as_missing: bool = False
    nn_depth: int = NN_CASCADE_DEPTH
    auto_levels: tuple[float, ...] = DEFAULT_LEVELS
    auto_seed: int = 42
    out_path: Optional[Path] = None
    provenance_path: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.method in (Method.LINEAR_INTERP, Method.LONG_TERM_MEAN):
            raise ConfigError(f"{self.method} cannot be the long-gap method")
        if self.neighbour_k < 1:
            raise ConfigError("neighbour_k must be >= 1")
        for p in (self.obs_path, self.meta_path):
            if not Path(p).exists():
                raise ConfigError(f"input file not found: {p}")


@dataclass(frozen=True)
class ProvenanceRow:
    station_id: str
    variable: Variable
    imputed: ImputedValue
    timestamp: str


@dataclass
class PipelineResult:
    filled: list[StationSeries]
    provenance: list[ProvenanceRow]
    validation: ValidationReport
    chosen_methods: dict[tuple[str, Variable], Method]
    residual: list[tuple[str, Variable, int, str]]  # (station, variable, slot, timestamp)

    @property
    def exit_code(self) -> int:
        return 2 if self.residual else 0

    def report_dict(self, config: PipelineConfig) -> dict:
        fill_counts: dict[str, int] = {}
        for row in self.provenance:
            key = row.imputed.method.value
            fill_counts[key] = fill_counts.get(key, 0) + 1
        return {
            "config": {
                "obs_path": str(config.obs_path),
                "meta_path": str(config.meta_path),
                "cadence_minutes": config.cadence.total_seconds() / 60.0,
                "method": config.method.value if config.method else "auto",
                "neighbour_k": config.neighbour_k,
                "rank": config.rank,
                "treat_out_of_bounds_as_missing": config.treat_out_of_bounds_as_missing,
            },
            "chosen_methods": {
                f"{sid}/{var.value}": m.value
                for (sid, var), m in sorted(
                    self.chosen_methods.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
                )
            },
            "fill_counts": dict(sorted(fill_counts.items())),
            "n_filled": len(self.provenance),
            "n_residual": len(self.residual),
            "residual": [
                {"station_id": sid, "variable": var.value, "slot": slot, "timestamp": ts}
                for sid, var, slot, ts in self.residual
            ],
            "validation": self.validation.to_dict(),
        }

    def report_json(self, config: PipelineConfig) -> str:
        return json.dumps(self.report_dict(config), indent=2) + "\n"


def _longest_present_run(series: StationSeries) -> tuple[int, int]:
    """Half-open [a, b) bounds of the longest run of present slots."""
    present = series.present_mask
    if not present.any():
        return 0, 0
    edges = np.diff(np.concatenate(([0], present.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    best = int(np.argmax(ends - starts))
    return int(starts[best]), int(ends[best])


def _auto_select(
    target_meta: StationMeta,
    target: StationSeries,
    candidates: Sequence[StationMeta],
    series_for_var: Mapping[str, StationSeries],
    config: PipelineConfig,
) -> Method:
    """Pick the lowest-RMSE neighbour method on the target's longest
    fully-present window, masking at the configured levels."""
    a, b = _longest_present_run(target)
    if b - a < AUTO_MIN_WINDOW:
        return AUTO_FALLBACK_METHOD
    window = np.arange(a, b)
    months_all = slot_month_array(target)
    sq_err = {m: 0.0 for m in NEIGHBOUR_METHODS}
    n_scored = {m: 0 for m in NEIGHBOUR_METHODS}
    for level in config.auto_levels:
        n_mask = int(round(level * len(window)))
        if n_mask < 1 or n_mask >= len(window):
            continue
        seed = derive_cell_seed(
            config.auto_seed, target_meta.station_id, target.variable, level,
            MaskPattern("point"),
        )
        rng = np.random.default_rng(seed)
        mask = np.sort(rng.choice(window, size=n_mask, replace=False))
        values = target.values.copy()
        values[mask] = np.nan
        masked = target.with_values(values, null_slots=target.null_slots)
        try:
            lookup = dict(series_for_var)
            lookup[target_meta.station_id] = masked
            ns = build_neighbour_set(
                target_meta, candidates, lookup,
                k=min(config.neighbour_k, len(candidates)), rank=config.rank,
            )
        except (NoCandidates, EmptyOverlap):
            return AUTO_FALLBACK_METHOD
        fallback = monthly_means(masked)
        for method in NEIGHBOUR_METHODS:
            for slot in mask:
                obs = _neighbour_obs(ns, series_for_var, int(slot))
                try:
                    iv = _impute_slot(
                        method, ns, int(slot), obs,
                        int(months_all[slot]), fallback, config.nn_depth,
                    )
                except ImputationError:
                    continue
                err = iv.value - target.values[slot]
                sq_err[method] += err * err
                n_scored[method] += 1
    scored = {
        m: np.sqrt(sq_err[m] / n_scored[m]) for m in NEIGHBOUR_METHODS if n_scored[m]
    }
    if not scored:
        return AUTO_FALLBACK_METHOD
    return min(scored, key=lambda m: (scored[m], NEIGHBOUR_METHODS.index(m)))


def _neighbour_obs(
    ns: NeighbourSet, series_for_var: Mapping[str, StationSeries], slot: int
) -> dict[str, float]:
    obs = {}
    for nb in ns.neighbours:
        s = series_for_var[nb.station_id]
        if slot < len(s):
            v = s.value_at(slot)
            if v is not None:
                obs[nb.station_id] = v
    return obs


def _impute_slot(
    method: Method,
    ns: NeighbourSet,
    slot: int,
    obs: Mapping[str, float],
    month: int,
    fallback_means: Mapping[int, float],
    nn_depth: int,
) -> ImputedValue:
    if method is Method.NN:
        return impute_nn(ns, slot, obs, month, fallback_means, nn_depth)
    return _SCALAR_IMPUTERS[method](ns, slot, obs)


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute the whole workflow and optionally write the output files."""
    stations = parse_station_meta(config.meta_path)
    meta_by_id = {m.station_id: m for m in stations}
    series = parse_observations(config.obs_path, config.cadence)
    for s in series:
        if s.station_id not in meta_by_id:
            raise ConfigError(
                f"observations reference station {s.station_id!r} "
                "with no metadata row"
            )
    validation = validate(series, config.bounds)

    # Working copies; optionally blank out-of-bounds values before filling.
    working: dict[tuple[str, Variable], StationSeries] = {}
    for s in series:
        if config.treat_out_of_bounds_as_missing and s.variable in config.bounds:
            lo, hi = config.bounds[s.variable]
            bad = s.present_mask & ((s.values < lo) | (s.values > hi))
            if bad.any():
                values = s.values.copy()
                values[bad] = np.nan
                s = s.with_values(values, null_slots=s.null_slots)
        working[(s.station_id, s.variable)] = s

    provenance: list[ProvenanceRow] = []
    residual: list[tuple[str, Variable, int, str]] = []
    chosen: dict[tuple[str, Variable], Method] = {}
    filled: list[StationSeries] = []

    for key in sorted(working, key=lambda k: (k[0], k[1].value)):
        station_id, variable = key
        target = working[key]
        gaps = detect_gaps(target)
        if not gaps:
            filled.append(target)
            continue
        short_gaps = [
            g for g in gaps
            if g.kind is GapClass.SHORT
            and g.first_slot > 0
            and g.first_slot + g.length < len(target)
        ]
        long_slots = [
            slot
            for g in gaps
            if g not in short_gaps
            for slot in g.slots
        ]

        new_values = target.values.copy()
        fills: list[ImputedValue] = []
        for g in short_gaps:
            fills.extend(linear_interpolate(target, g))

        if long_slots:
            candidates = [
                meta_by_id[sid]
                for (sid, var) in sorted(working, key=lambda k: k[0])
                if var is variable and sid != station_id
            ]
            series_for_var = {
                sid: s for (sid, var), s in working.items() if var is variable
            }
            series_for_var_all = dict(series_for_var)
            series_for_var_all[station_id] = target
            ns = None
            if candidates:
                try:
                    ns = build_neighbour_set(
                        meta_by_id[station_id],
                        candidates,
                        series_for_var_all,
                        k=min(config.neighbour_k, len(candidates)),
                        rank=config.rank,
                    )
                except (NoCandidates, EmptyOverlap):
                    ns = None
            if ns is None:
                residual.extend(
                    (station_id, variable, slot, format_timestamp(target.slot_time(slot)))
                    for slot in long_slots
                )
            else:
                method = config.method
                if method is None:
                    method = _auto_select(
                        meta_by_id[station_id], target, candidates,
                        series_for_var, config,
                    )
                chosen[key] = method
                months_all = slot_month_array(target)
                fallback = monthly_means(target)
                for slot in long_slots:
                    obs = _neighbour_obs(ns, series_for_var, slot)
                    try:
                        iv = _impute_slot(
                            method, ns, slot, obs,
                            int(months_all[slot]), fallback, config.nn_depth,
                        )
                    except ImputationError:
                        residual.append(
                            (station_id, variable, slot,
                             format_timestamp(target.slot_time(slot)))
                        )
                        continue
                    fills.append(iv)

        for iv in fills:
            new_values[iv.slot] = iv.value
            provenance.append(
                ProvenanceRow(
                    station_id, variable, iv,
                    format_timestamp(target.slot_time(iv.slot)),
                )
            )
        still_null = frozenset(
            i for i in target.null_slots if np.isnan(new_values[i])
        )
        filled.append(target.with_values(new_values, null_slots=still_null))

    provenance.sort(key=lambda r: (r.station_id, r.variable.value, r.imputed.slot))
    residual.sort(key=lambda r: (r[0], r[1].value, r[2]))
    result = PipelineResult(
        filled=filled,
        provenance=provenance,
        validation=validation,
        chosen_methods=chosen,
        residual=residual,
    )

    if config.out_path is not None:
        write_observations(config.out_path, filled)
    if config.provenance_path is not None:
        write_provenance(config.provenance_path, provenance)
    return result


PROVENANCE_HEADER = [
    "station_id", "variable", "slot", "timestamp",
    "value", "method", "contributing_stations", "clamped",
]


def write_provenance(path, rows: Sequence[ProvenanceRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROVENANCE_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.station_id,
                    r.variable.value,
                    r.imputed.slot,
                    r.timestamp,
                    repr(r.imputed.value),
                    r.imputed.method.value,
                    ";".join(r.imputed.contributing_stations),
                    "true" if r.imputed.clamped else "false",
                ]
            )
