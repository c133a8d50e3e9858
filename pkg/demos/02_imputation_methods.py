"""The four neighbour estimators on one missing slot, by hand.

Each method answers the same question -- "station s is missing a value at
time t; its neighbours are not" -- with a different weighting philosophy:

  nr    mean-ratio scaling, equal weight per neighbour
  gc    inverse squared coordinate offset, no use of the data history
  nrgc  both factors multiplied together
  nn    copy the closest station that has data, with a monthly-mean net

Run: python demos/02_imputation_methods.py
"""
from stationfill import build_neighbour_set, impute_gc, impute_nn, impute_nr, impute_nrgc
from stationfill.impute import monthly_means
from stationfill.model import Variable
from stationfill.synth import synth_dataset

series, stations = synth_dataset(n_stations=6, days=10, seed=5)
temp = {
    s.station_id: s for s in series if s.variable is Variable.TEMPERATURE
}

target_meta = stations[0]
candidates = stations[1:]

# Pretend slot 500 is missing at the target and build the neighbour set
# from everything else. Pair means are computed over the slots where the
# target and each neighbour are both present.
slot = 500
truth = temp[target_meta.station_id].value_at(slot)
values = temp[target_meta.station_id].values.copy()
values[slot] = float("nan")
masked = temp[target_meta.station_id].with_values(values)

lookup = dict(temp)
lookup[target_meta.station_id] = masked
ns = build_neighbour_set(target_meta, candidates, lookup, k=3)

print(f"target {target_meta.station_id}, missing slot {slot}, true value {truth:.2f}\n")
print(f"{'neighbour':>10s} {'km':>6s} {'d_lon':>7s} {'d_lat':>7s} {'M_s':>6s} {'M_i':>6s}")
for nb in ns.neighbours:
    print(
        f"{nb.station_id:>10s} {nb.distance_km:6.1f} {nb.d_lon:7.3f} "
        f"{nb.d_lat:7.3f} {nb.mean_target:6.2f} {nb.mean_neighbour:6.2f}"
    )

observations = {
    nb.station_id: temp[nb.station_id].value_at(slot) for nb in ns.neighbours
}
print("\nobservations at the missing slot:", {
    k: round(v, 2) for k, v in observations.items()
})

print(f"\n{'method':>6s} {'estimate':>9s} {'error':>8s}  contributors")
for name, estimate in [
    ("nr", impute_nr(ns, slot, observations)),
    ("gc", impute_gc(ns, slot, observations)),
    ("nrgc", impute_nrgc(ns, slot, observations)),
    ("nn", impute_nn(
        ns, slot, observations,
        month=masked.slot_month(slot),
        fallback_means=monthly_means(masked),
    )),
]:
    print(
        f"{name:>6s} {estimate.value:9.3f} {estimate.value - truth:+8.3f}  "
        f"{','.join(estimate.contributing_stations)}"
    )

# The cascade side of nn: strip the neighbours' data away and it falls back
# to the target's own long-term mean for that calendar month.
fallback = impute_nn(
    ns, slot, {}, month=masked.slot_month(slot), fallback_means=monthly_means(masked)
)
print(
    f"\nwith no neighbour data at all, nn falls back to the monthly mean: "
    f"{fallback.value:.3f} ({fallback.method})"
)
