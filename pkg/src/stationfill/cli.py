"""Command-line interface.

Subcommands: validate, gaps, fill, bench, synth, plot.
Exit codes: 0 success, 2 residual gaps after fill, 3 input/config error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from datetime import timedelta
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigError, StationFillError
from .evaluate import (
    DEFAULT_LEVELS,
    EvalConfig,
    MaskPattern,
    run_benchmark,
)
from .impute import NN_CASCADE_DEPTH
from .ingest import (
    DEFAULT_BOUNDS,
    detect_gaps,
    format_timestamp,
    parse_observations,
    parse_station_meta,
    validate,
    write_observations,
    write_station_meta,
)
from .model import Method, Variable
from .pipeline import PipelineConfig, run_pipeline
from .synth import synth_dataset

EXIT_OK = 0
EXIT_RESIDUAL = 2
EXIT_CONFIG = 3


def _parse_cadence(text: str) -> timedelta:
    """Durations like 15m, 1h, 900s, or a bare number of minutes."""
    text = text.strip()
    try:
        if text.endswith("m"):
            return timedelta(minutes=float(text[:-1]))
        if text.endswith("h"):
            return timedelta(hours=float(text[:-1]))
        if text.endswith("s"):
            return timedelta(seconds=float(text[:-1]))
        return timedelta(minutes=float(text))
    except ValueError:
        raise ConfigError(f"cannot parse cadence {text!r}") from None


def _parse_bounds(pairs: Optional[Sequence[str]]) -> dict[Variable, tuple[float, float]]:
    bounds = dict(DEFAULT_BOUNDS)
    for item in pairs or []:
        try:
            name, range_text = item.split("=", 1)
            lo_text, hi_text = range_text.split(":", 1)
            bounds[Variable(name)] = (float(lo_text), float(hi_text))
        except ValueError:
            raise ConfigError(
                f"cannot parse bounds {item!r} (want variable=min:max)"
            ) from None
    return bounds


def _parse_methods(text: str) -> tuple[Method, ...]:
    try:
        return tuple(Method(part.strip()) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse methods {text!r}") from None


def _parse_levels(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse levels {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stationfill",
        description="Detect, classify, and fill gaps in weather station series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report per-year completeness counts")
    p.add_argument("obs", help="observations CSV")
    p.add_argument("--meta", required=True, help="station metadata CSV")
    p.add_argument("--cadence", default="15m")
    p.add_argument("--bounds", action="append", metavar="VAR=MIN:MAX")

    p = sub.add_parser("gaps", help="list gaps as CSV")
    p.add_argument("obs")
    p.add_argument("--station")
    p.add_argument("--variable", choices=[v.value for v in Variable])
    p.add_argument("--cadence", default="15m")

    p = sub.add_parser("fill", help="fill short and long gaps")
    p.add_argument("obs")
    p.add_argument("--meta", required=True)
    p.add_argument(
        "--method", required=True,
        choices=["nr", "gc", "nrgc", "nn", "auto"],
    )
    p.add_argument("--neighbours", type=int, default=2)
    p.add_argument("--rank", choices=["geometric", "correlation"], default="geometric")
    p.add_argument("--nn-depth", type=int, default=NN_CASCADE_DEPTH)
    p.add_argument("--cadence", default="15m")
    p.add_argument("--bounds", action="append", metavar="VAR=MIN:MAX")
    p.add_argument("--treat-out-of-bounds-as-missing", action="store_true")
    p.add_argument("--out", required=True, help="filled observations CSV")
    p.add_argument("--provenance", required=True, help="provenance sidecar CSV")

    p = sub.add_parser("bench", help="benchmark methods by masking and scoring RMSE")
    p.add_argument("obs")
    p.add_argument("--meta", required=True)
    p.add_argument("--levels", default=",".join(repr(lv) for lv in DEFAULT_LEVELS))
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--methods", default="nr,gc,nrgc,nn")
    p.add_argument("--pattern", default="point", help="point or block:<len>")
    p.add_argument("--neighbours", type=int, default=2)
    p.add_argument("--rank", choices=["geometric", "correlation"], default="geometric")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cadence", default="15m")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--csv", help="also export flat cells CSV")

    p = sub.add_parser("synth", help="generate a synthetic station network")
    p.add_argument("--stations", type=int, default=12)
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--cadence", default="15m")
    p.add_argument("--noise-scale", type=float, default=1.0)
    p.add_argument("--out", required=True, help="observations CSV")
    p.add_argument("--meta-out", required=True, help="station metadata CSV")

    p = sub.add_parser("plot", help="chart an RMSE report")
    p.add_argument("report", help="report JSON from bench")
    p.add_argument("--out", required=True, help="SVG path")
    return parser


def _cmd_validate(args) -> int:
    parse_station_meta(args.meta)
    series = parse_observations(args.obs, _parse_cadence(args.cadence))
    report = validate(series, _parse_bounds(args.bounds))
    sys.stdout.write(report.to_json())
    return EXIT_OK


def _cmd_gaps(args) -> int:
    series = parse_observations(args.obs, _parse_cadence(args.cadence))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["station_id", "variable", "first_slot", "timestamp", "length", "class"])
    for s in series:
        if args.station and s.station_id != args.station:
            continue
        if args.variable and s.variable.value != args.variable:
            continue
        for g in detect_gaps(s):
            writer.writerow(
                [
                    s.station_id,
                    s.variable.value,
                    g.first_slot,
                    format_timestamp(s.slot_time(g.first_slot)),
                    g.length,
                    g.kind.value,
                ]
            )
    return EXIT_OK


def _cmd_fill(args) -> int:
    config = PipelineConfig(
        obs_path=Path(args.obs),
        meta_path=Path(args.meta),
        cadence=_parse_cadence(args.cadence),
        method=None if args.method == "auto" else Method(args.method),
        neighbour_k=args.neighbours,
        rank=args.rank,
        bounds=_parse_bounds(args.bounds),
        treat_out_of_bounds_as_missing=args.treat_out_of_bounds_as_missing,
        nn_depth=args.nn_depth,
        out_path=Path(args.out),
        provenance_path=Path(args.provenance),
    )
    result = run_pipeline(config)
    sys.stdout.write(result.report_json(config))
    return result.exit_code


def _cmd_bench(args) -> int:
    stations = parse_station_meta(args.meta)
    series = parse_observations(args.obs, _parse_cadence(args.cadence))
    config = EvalConfig(
        levels=_parse_levels(args.levels),
        seed=args.seed,
        methods=_parse_methods(args.methods),
        pattern=MaskPattern.parse(args.pattern),
        neighbour_k=args.neighbours,
        rank=args.rank,
    )
    report = run_benchmark(series, stations, config, max_workers=max(1, args.threads))
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK


def _cmd_synth(args) -> int:
    series, stations = synth_dataset(
        n_stations=args.stations,
        days=args.days,
        seed=args.seed,
        cadence=_parse_cadence(args.cadence),
        noise_scale=args.noise_scale,
    )
    write_observations(args.out, series)
    write_station_meta(args.meta_out, stations)
    return EXIT_OK


def _cmd_plot(args) -> int:
    import json

    from .evaluate import EvalCell, EvalReport
    from .plotting import emit_plot

    raw = json.loads(Path(args.report).read_text(encoding="utf-8"))
    config = EvalConfig(
        levels=tuple(raw["config"]["levels"]),
        seed=raw["config"]["seed"],
        methods=tuple(Method(m) for m in raw["config"]["methods"]),
        pattern=MaskPattern.parse(raw["config"]["pattern"]),
        neighbour_k=raw["config"]["neighbour_k"],
        rank=raw["config"].get("rank", "geometric"),
    )
    cells = tuple(
        EvalCell(
            station_id=c["station_id"],
            variable=Variable(c["variable"]),
            method=Method(c["method"]),
            level=c["level"],
            rmse=c["rmse"],
            n_masked=c["n_masked"],
            n_unfilled=c["n_unfilled"],
        )
        for c in raw["cells"]
    )
    report = EvalReport(config=config, cells=cells, version=raw.get("version", ""))
    emit_plot(report, args.out)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "gaps": _cmd_gaps,
    "fill": _cmd_fill,
    "bench": _cmd_bench,
    "synth": _cmd_synth,
    "plot": _cmd_plot,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (StationFillError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
