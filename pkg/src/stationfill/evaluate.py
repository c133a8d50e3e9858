"""Benchmark harness: inject artificial missingness into complete series,
impute with each method, and score RMSE per (station, variable, method,
missingness level).

Masking is per-station independent and MCAR by default, with an optional
block pattern for bursty outages. Every cell's RNG stream is derived from
(seed, station, variable, level, pattern), so results do not depend on
execution order or thread count.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import __version__
from .errors import (
    EmptyInput,
    EmptyOverlap,
    LevelInfeasible,
    NoCandidates,
)
from .geo import build_neighbour_set
from .impute import (
    NN_CASCADE_DEPTH,
    monthly_means,
    nn_estimates,
    nr_estimates,
    slot_month_array,
    weighted_estimates,
)
from .model import (
    Method,
    NEIGHBOUR_METHODS,
    NeighbourSet,
    StationMeta,
    StationSeries,
    Variable,
)

DEFAULT_LEVELS = (0.05, 0.10, 0.15, 0.20, 0.25)


@dataclass(frozen=True)
class MaskPattern:
    """Shape of injected missingness: single slots or runs of block_len."""

    kind: str = "point"
    block_len: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("point", "block"):
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.kind == "block" and self.block_len < 1:
            raise ValueError("block_len must be >= 1")

    def __str__(self) -> str:
        return self.kind if self.kind == "point" else f"block:{self.block_len}"

    @classmethod
    def parse(cls, text: str) -> "MaskPattern":
        if text == "point":
            return cls("point")
        if text.startswith("block:"):
            return cls("block", int(text.split(":", 1)[1]))
        raise ValueError(f"unknown pattern {text!r} (want point or block:<len>)")


@dataclass(frozen=True)
class EvalConfig:
    levels: tuple[float, ...] = DEFAULT_LEVELS
    seed: int = 42
    methods: tuple[Method, ...] = NEIGHBOUR_METHODS
    pattern: MaskPattern = field(default_factory=MaskPattern)
    neighbour_k: int = 2
    rank: str = "geometric"

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("need at least one missingness level")
        if any(not 0.0 < lv < 1.0 for lv in self.levels):
            raise ValueError("levels must lie in (0, 1)")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be strictly increasing")
        bad = [m for m in self.methods if m not in NEIGHBOUR_METHODS]
        if bad:
            raise ValueError(f"methods {bad} cannot be benchmarked")
        if self.neighbour_k < 1:
            raise ValueError("neighbour_k must be >= 1")


@dataclass(frozen=True)
class EvalCell:
    station_id: str
    variable: Variable
    method: Method
    level: float
    rmse: Optional[float]
    n_masked: int
    n_unfilled: int

    def to_dict(self) -> dict:
        return {
            "station_id": self.station_id,
            "variable": self.variable.value,
            "method": self.method.value,
            "level": self.level,
            "rmse": self.rmse,
            "n_masked": self.n_masked,
            "n_unfilled": self.n_unfilled,
        }


@dataclass(frozen=True)
class EvalReport:
    config: EvalConfig
    cells: tuple[EvalCell, ...]
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "config": {
                "levels": list(self.config.levels),
                "seed": self.config.seed,
                "methods": [m.value for m in self.config.methods],
                "pattern": str(self.config.pattern),
                "neighbour_k": self.config.neighbour_k,
                "rank": self.config.rank,
                "masking": "per-station-independent",
            },
            "cells": [c.to_dict() for c in self.cells],
            "version": self.version,
        }

    def to_json(self) -> str:
        """Stable key order; byte-identical for identical config + dataset."""
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        """Flat export of the cells for external plotting."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["station_id", "variable", "method", "level", "rmse", "n_masked", "n_unfilled"]
        )
        for c in self.cells:
            writer.writerow(
                [
                    c.station_id,
                    c.variable.value,
                    c.method.value,
                    repr(c.level),
                    "" if c.rmse is None else repr(c.rmse),
                    c.n_masked,
                    c.n_unfilled,
                ]
            )
        return buf.getvalue()

    def mean_rmse(self, variable: Variable, method: Method) -> Optional[float]:
        """Mean of the per-cell RMSEs for one variable and method."""
        vals = [
            c.rmse
            for c in self.cells
            if c.variable is variable and c.method is method and c.rmse is not None
        ]
        return float(np.mean(vals)) if vals else None


def derive_cell_seed(
    seed: int, station_id: str, variable: Variable, level: float, pattern: MaskPattern
) -> int:
    """Stable per-cell RNG seed so cell order and threading cannot matter."""
    key = f"{seed}|{station_id}|{variable.value}|{level!r}|{pattern}"
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def inject_missingness(
    series: StationSeries,
    level: float,
    pattern: MaskPattern = MaskPattern(),
    seed: int = 0,
) -> tuple[StationSeries, np.ndarray]:
    """Mask round(level * present_count) present slots; return (masked, mask).

    The mask is a sorted array of slot indices. Point masking draws slots
    uniformly without replacement; block masking places non-overlapping runs
    of ``block_len`` (the last run may be shorter to hit the exact count).
    Deterministic given (seed, series, level, pattern); at least one present
    value always survives.
    """
    if not 0.0 <= level < 1.0:
        raise ValueError("level must lie in [0, 1)")
    present_idx = np.flatnonzero(series.present_mask)
    n_present = len(present_idx)
    n_mask = int(round(level * n_present))
    if n_mask == 0:
        return series, np.array([], dtype=np.int64)
    if n_mask >= n_present:
        raise LevelInfeasible(
            f"masking {n_mask} of {n_present} present slots leaves nothing"
        )
    rng = np.random.default_rng(seed)
    if pattern.kind == "point":
        chosen = rng.choice(present_idx, size=n_mask, replace=False)
        mask = np.sort(chosen)
    else:
        mask = _place_blocks(series.present_mask, n_mask, pattern.block_len, rng)
    values = series.values.copy()
    values[mask] = np.nan
    return series.with_values(values, null_slots=series.null_slots), mask


def _place_blocks(
    present: np.ndarray, n_mask: int, block_len: int, rng: np.random.Generator
) -> np.ndarray:
    avail = present.copy()
    picked: list[int] = []
    remaining = n_mask
    while remaining > 0:
        want = min(block_len, remaining)
        starts = _run_starts(avail, want)
        while len(starts) == 0 and want > 1:
            want -= 1
            starts = _run_starts(avail, want)
        if len(starts) == 0:
            raise LevelInfeasible("cannot place the requested block mask")
        s = int(rng.choice(starts))
        picked.extend(range(s, s + want))
        avail[s : s + want] = False
        remaining -= want
    return np.sort(np.array(picked, dtype=np.int64))


def _run_starts(avail: np.ndarray, length: int) -> np.ndarray:
    """Indices where a run of `length` maskable slots begins."""
    if length > len(avail):
        return np.array([], dtype=np.int64)
    window = np.convolve(avail.astype(np.int64), np.ones(length, dtype=np.int64), "valid")
    return np.flatnonzero(window == length)


def rmse(pairs: Iterable[tuple[float, float]]) -> float:
    """Root mean square error over (estimate, truth) pairs."""
    arr = np.asarray(list(pairs), dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("rmse of an empty sequence")
    diff = arr[:, 0] - arr[:, 1]
    return float(np.sqrt(np.mean(diff * diff)))


def _rmse_arrays(estimates: np.ndarray, truth: np.ndarray) -> float:
    diff = estimates - truth
    return float(np.sqrt(np.mean(diff * diff)))


def method_estimates(
    method: Method,
    ns: NeighbourSet,
    obs_matrix: np.ndarray,
    months: np.ndarray,
    fallback_means: Mapping[int, float],
    nn_depth: int = NN_CASCADE_DEPTH,
) -> np.ndarray:
    """Batch estimates for masked slots; NaN where the method has no answer.

    Rainfall estimates are clamped to >= 0, matching the scalar forms.
    """
    if method is Method.NR:
        est = nr_estimates(ns, obs_matrix)
    elif method is Method.GC:
        est, _ = weighted_estimates(ns, obs_matrix, use_ratio=False)
    elif method is Method.NRGC:
        est, _ = weighted_estimates(ns, obs_matrix, use_ratio=True)
    elif method is Method.NN:
        est, _ = nn_estimates(ns, obs_matrix, months, fallback_means, nn_depth)
    else:
        raise ValueError(f"{method} is not a neighbour method")
    if ns.variable is Variable.RAINFALL:
        est = np.where(np.isnan(est), est, np.maximum(est, 0.0))
    return est


def _bench_cell(
    target_meta: StationMeta,
    target_series: StationSeries,
    level: float,
    candidates: Sequence[StationMeta],
    series_by_station: Mapping[str, StationSeries],
    config: EvalConfig,
) -> list[EvalCell]:
    """All method cells for one (station, variable, level)."""
    cell_seed = derive_cell_seed(
        config.seed, target_meta.station_id, target_series.variable, level, config.pattern
    )
    out: list[EvalCell] = []

    def failed(n_masked: int) -> list[EvalCell]:
        return [
            EvalCell(
                target_meta.station_id, target_series.variable, m, level,
                rmse=None, n_masked=n_masked, n_unfilled=n_masked,
            )
            for m in config.methods
        ]

    try:
        masked, mask = inject_missingness(
            target_series, level, config.pattern, cell_seed
        )
    except LevelInfeasible:
        return failed(0)
    if len(mask) == 0:
        return failed(0)
    truth = target_series.values[mask]

    k = min(config.neighbour_k, len(candidates))
    try:
        lookup = dict(series_by_station)
        lookup[target_meta.station_id] = masked
        ns = build_neighbour_set(
            target_meta, candidates, lookup, k=k, rank=config.rank
        )
    except (NoCandidates, EmptyOverlap):
        return failed(len(mask))

    obs_matrix = np.vstack(
        [series_by_station[nb.station_id].values[mask] for nb in ns.neighbours]
    )
    months = slot_month_array(masked)[mask]
    fallback = monthly_means(masked)
    for method in config.methods:
        est = method_estimates(method, ns, obs_matrix, months, fallback)
        filled = ~np.isnan(est)
        n_unfilled = int((~filled).sum())
        score = (
            _rmse_arrays(est[filled], truth[filled]) if filled.any() else None
        )
        out.append(
            EvalCell(
                target_meta.station_id, target_series.variable, method, level,
                rmse=score, n_masked=len(mask), n_unfilled=n_unfilled,
            )
        )
    return out


def run_benchmark(
    series: Sequence[StationSeries],
    stations: Sequence[StationMeta],
    config: EvalConfig = EvalConfig(),
    max_workers: int = 1,
) -> EvalReport:
    """Mask, impute, and score every (station, variable, method, level) cell.

    Per-cell failures (no neighbours, infeasible masks, methods with no
    answer for a slot) are recorded in ``n_unfilled`` rather than aborting.
    Identical inputs produce byte-identical reports for any ``max_workers``.
    """
    by_station_var: dict[tuple[str, Variable], StationSeries] = {}
    for s in series:
        key = (s.station_id, s.variable)
        if key in by_station_var:
            raise ValueError(f"duplicate series for {key}")
        by_station_var[key] = s
    meta_by_id = {m.station_id: m for m in stations}

    tasks = []
    for (station_id, variable), target in sorted(
        by_station_var.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
    ):
        if station_id not in meta_by_id:
            raise ValueError(f"no station metadata for {station_id!r}")
        candidates = [
            meta_by_id[sid]
            for (sid, var) in sorted(by_station_var, key=lambda k: k[0])
            if var is variable and sid != station_id and sid in meta_by_id
        ]
        series_for_var = {
            sid: s for (sid, var), s in by_station_var.items() if var is variable
        }
        for level in config.levels:
            tasks.append(
                (meta_by_id[station_id], target, level, candidates, series_for_var)
            )

    def run(task) -> list[EvalCell]:
        meta, target, level, candidates, series_for_var = task
        return _bench_cell(meta, target, level, candidates, series_for_var, config)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            chunks = list(pool.map(run, tasks))
    else:
        chunks = [run(t) for t in tasks]

    cells = [c for chunk in chunks for c in chunk]
    cells.sort(
        key=lambda c: (c.station_id, c.variable.value, c.method.value, c.level)
    )
    return EvalReport(config=config, cells=tuple(cells))
