"""Mask-and-score benchmark across missingness levels, plus the chart.

Every (station, variable, level) cell masks known values with its own
seeded RNG stream, imputes them with each method, and scores RMSE against
the held-out truth. Output lands in demo_output/.

Run: python demos/03_benchmark.py
"""
from pathlib import Path

from stationfill import EvalConfig, emit_plot, run_benchmark, synth_dataset
from stationfill.model import Variable

out_dir = Path(__file__).resolve().parent.parent / "demo_output"
out_dir.mkdir(exist_ok=True)

series, stations = synth_dataset(n_stations=8, days=30, seed=41)
config = EvalConfig(
    levels=(0.05, 0.10, 0.15, 0.20, 0.25),
    seed=42,
    neighbour_k=2,
)
report = run_benchmark(series, stations, config)

for variable in Variable:
    print(f"\nmean RMSE, {variable.value} (lower is better)")
    for method in config.methods:
        print(f"  {method.value:>5s}: {report.mean_rmse(variable, method):.4f}")

# Per-level view for one station: the panel layout of the chart.
station = stations[0].station_id
print(f"\nper-level RMSE for {station}/temperature")
print("level " + " ".join(f"{m.value:>8s}" for m in config.methods))
for level in config.levels:
    row = []
    for method in config.methods:
        (cell,) = [
            c for c in report.cells
            if c.station_id == station
            and c.variable is Variable.TEMPERATURE
            and c.method is method
            and c.level == level
        ]
        row.append(f"{cell.rmse:8.4f}")
    print(f"{level:5.2f} " + " ".join(row))

report_path = out_dir / "benchmark.json"
report_path.write_text(report.to_json(), encoding="utf-8")
chart_path = out_dir / "benchmark.svg"
emit_plot(report, chart_path)
print(f"\nwrote {report_path}")
print(f"wrote {chart_path} (one panel per station and variable)")
