"""Walk through ingestion: generate a small network, punch holes in it,
then validate completeness and list the gaps.

Run from the repository root:

    python demos/01_validate_and_gaps.py
"""
from stationfill import (
    GapClass,
    detect_gaps,
    inject_missingness,
    synth_dataset,
    validate,
)
from stationfill.evaluate import MaskPattern

# ---------------------------------------------------------------------------
# A synthetic four-station network, one week of 15-minute data.
# ---------------------------------------------------------------------------
series, stations = synth_dataset(n_stations=4, days=7, seed=2024)
print(f"{len(stations)} stations, {len(series)} series, "
      f"{len(series[0])} slots per series")
for st in stations:
    print(f"  {st.station_id}: lon={st.longitude:+.3f} lat={st.latitude:.3f}")

# ---------------------------------------------------------------------------
# Knock out ~8% of one temperature series in bursts of 6 slots (90 minutes),
# the shape a real outage takes.
# ---------------------------------------------------------------------------
target = next(s for s in series if s.variable.value == "temperature")
damaged, mask = inject_missingness(
    target, level=0.08, pattern=MaskPattern("block", 6), seed=7
)
print(f"\nmasked {len(mask)} of {target.present_count} slots in "
      f"{target.station_id}/{target.variable}")

# ---------------------------------------------------------------------------
# Validation counts every slot exactly once per calendar year.
# ---------------------------------------------------------------------------
report = validate([damaged])
for cell in report.cells:
    print(
        f"\nyear {cell.year}: expected={cell.expected_records} "
        f"present={cell.present_records} missing={cell.missing_records} "
        f"null={cell.null_records}"
    )
    assert (
        cell.present_records + cell.null_records + cell.missing_records
        == cell.expected_records
    )
    print(f"gap histogram: {dict(cell.gap_histogram)}")

# ---------------------------------------------------------------------------
# The gap list drives the fill strategy: short gaps (under one hour) get
# linear interpolation, long ones need the neighbour methods.
# ---------------------------------------------------------------------------
gaps = detect_gaps(damaged)
short = [g for g in gaps if g.kind is GapClass.SHORT]
long_ = [g for g in gaps if g.kind is GapClass.LONG]
print(f"\n{len(gaps)} gaps: {len(short)} short, {len(long_)} long")
for g in gaps[:5]:
    minutes = g.length * 15
    print(f"  slot {g.first_slot:5d}  length {g.length:2d}  ({minutes:3d} min)  {g.kind}")
