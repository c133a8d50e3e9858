import numpy as np
import pytest

from stationfill.ingest import (
    parse_observations,
    write_observations,
    write_station_meta,
)
from stationfill.model import (
    Method,
    NEIGHBOUR_METHODS,
    StationMeta,
    Variable,
)
from stationfill.pipeline import PipelineConfig, run_pipeline
from stationfill.errors import ConfigError

from conftest import make_series

STATIONS = [
    StationMeta("a", -2.00, 51.50, "target"),
    StationMeta("b", -2.10, 51.55, "near"),
    StationMeta("c", -2.40, 51.80, "far"),
]


def write_dataset(tmp_path, series, stations=STATIONS):
    obs = tmp_path / "obs.csv"
    meta = tmp_path / "meta.csv"
    write_observations(obs, series)
    write_station_meta(meta, stations)
    return obs, meta


def base_config(tmp_path, obs, meta, method=Method.NRGC, **kwargs):
    return PipelineConfig(
        obs_path=obs,
        meta_path=meta,
        method=method,
        out_path=tmp_path / "filled.csv",
        provenance_path=tmp_path / "prov.csv",
        **kwargs,
    )


def two_day_values(rng, base=10.0):
    return list(base + rng.normal(0.0, 2.0, size=192))


class TestShortGapFill:
    def test_three_slot_gap_interpolated(self, tmp_path, rng):
        values = two_day_values(rng)
        values[9] = 10.0
        values[10:13] = [None, None, None]
        values[13] = 14.0
        series = [
            make_series(values, station_id="a"),
            make_series(two_day_values(rng), station_id="b"),
        ]
        obs, meta = write_dataset(tmp_path, series)
        result = run_pipeline(base_config(tmp_path, obs, meta))
        assert result.exit_code == 0
        linear = [
            r for r in result.provenance if r.imputed.method is Method.LINEAR_INTERP
        ]
        assert [(r.imputed.slot, r.imputed.value) for r in linear] == [
            (10, pytest.approx(11.0)),
            (11, pytest.approx(12.0)),
            (12, pytest.approx(13.0)),
        ]

    def test_complete_input_noop(self, tmp_path, rng):
        series = [
            make_series(two_day_values(rng), station_id="a"),
            make_series(two_day_values(rng), station_id="b"),
        ]
        obs, meta = write_dataset(tmp_path, series)
        result = run_pipeline(base_config(tmp_path, obs, meta))
        assert result.provenance == []
        assert (tmp_path / "filled.csv").read_bytes() == obs.read_bytes()
        prov_lines = (tmp_path / "prov.csv").read_text().splitlines()
        assert len(prov_lines) == 1  # header only


def nrgc_oracle_fill(target_vals, nb_specs, gap_slots):
    """Hand evaluation of the combined estimator for each gap slot.

    nb_specs: list of (values, d_lon, d_lat). Pair means are taken over the
    slots where both target and that neighbour are present.
    """
    out = {}
    present_t = [i for i, v in enumerate(target_vals) if v is not None]
    factors = []
    for vals, d_lon, d_lat in nb_specs:
        overlap = [i for i in present_t if vals[i] is not None]
        m_s = sum(target_vals[i] for i in overlap) / len(overlap)
        m_i = sum(vals[i] for i in overlap) / len(overlap)
        factors.append((1.0 / (d_lon ** 2 + d_lat ** 2)) * (m_s / m_i))
    for t in gap_slots:
        num = den = 0.0
        for (vals, _, _), w in zip(nb_specs, factors):
            if vals[t] is None:
                continue
            num += w * vals[t]
            den += w
        out[t] = num / den
    return out


class TestLongGapFill:
    def test_eight_slot_gap_nrgc_with_two_neighbours(self, tmp_path, rng):
        a_vals = two_day_values(rng)
        gap = list(range(50, 58))
        for i in gap:
            a_vals[i] = None
        b_vals = two_day_values(rng, base=11.0)
        c_vals = two_day_values(rng, base=9.0)
        series = [
            make_series(a_vals, station_id="a"),
            make_series(b_vals, station_id="b"),
            make_series(c_vals, station_id="c"),
        ]
        obs, meta = write_dataset(tmp_path, series)
        result = run_pipeline(base_config(tmp_path, obs, meta, method=Method.NRGC))
        assert result.exit_code == 0
        rows = [r for r in result.provenance if r.station_id == "a"]
        assert len(rows) == 8
        expected = nrgc_oracle_fill(
            a_vals,
            [
                (b_vals, STATIONS[1].longitude - STATIONS[0].longitude,
                 STATIONS[1].latitude - STATIONS[0].latitude),
                (c_vals, STATIONS[2].longitude - STATIONS[0].longitude,
                 STATIONS[2].latitude - STATIONS[0].latitude),
            ],
            gap,
        )
        for r in rows:
            assert r.imputed.method is Method.NRGC
            assert set(r.imputed.contributing_stations) == {"b", "c"}
            assert r.imputed.value == pytest.approx(expected[r.imputed.slot], abs=1e-12)

    def test_edge_gap_routed_to_long_method_despite_length(self, tmp_path, rng):
        a_vals = two_day_values(rng)
        a_vals[0] = None
        a_vals[1] = None  # 2-slot gap, would be Short, but touches the edge
        series = [
            make_series(a_vals, station_id="a"),
            make_series(two_day_values(rng), station_id="b"),
        ]
        obs, meta = write_dataset(tmp_path, series)
        result = run_pipeline(base_config(tmp_path, obs, meta, method=Method.GC))
        methods = {r.imputed.slot: r.imputed.method for r in result.provenance}
        assert methods[0] is Method.GC
        assert methods[1] is Method.GC

    def test_neighbour_methods_read_only_original_values(self, tmp_path, rng):
        # b has a short interior gap at slot 24 that will be interpolated;
        # a's long gap covers 20..27, so at slot 24 it has no neighbour data
        # and must stay unfilled (with b as the only neighbour).
        a_vals = two_day_values(rng)
        for i in range(20, 28):
            a_vals[i] = None
        b_vals = two_day_values(rng)
        b_vals[24] = None
        series = [
            make_series(a_vals, station_id="a"),
            make_series(b_vals, station_id="b"),
        ]
        obs, meta = write_dataset(tmp_path, series, stations=STATIONS[:2])
        result = run_pipeline(
            base_config(tmp_path, obs, meta, method=Method.NR, neighbour_k=1)
        )
        assert result.exit_code == 2
        assert [(sid, slot) for sid, var, slot, _ in result.residual] == [("a", 24)]
        filled_a = [r.imputed.slot for r in result.provenance if r.station_id == "a"]
        assert sorted(filled_a) == [20, 21, 22, 23, 25, 26, 27]
        # b's own short gap was interpolated
        assert any(
            r.station_id == "b" and r.imputed.method is Method.LINEAR_INTERP
            for r in result.provenance
        )

    def test_nn_fallback_used_when_all_neighbours_missing(self, tmp_path, rng):
        a_vals = two_day_values(rng)
        b_vals = two_day_values(rng)
        for i in range(40, 46):
            a_vals[i] = None
            b_vals[i] = None  # neighbour missing on the same span
        series = [
            make_series(a_vals, station_id="a"),
            make_series(b_vals, station_id="b"),
        ]
        obs, meta = write_dataset(tmp_path, series, stations=STATIONS[:2])
        result = run_pipeline(
            base_config(tmp_path, obs, meta, method=Method.NN, neighbour_k=1)
        )
        assert result.exit_code == 0
        by_slot = {
            r.imputed.slot: r.imputed
            for r in result.provenance
            if r.station_id == "a"
        }
        assert all(by_slot[i].method is Method.LONG_TERM_MEAN for i in range(40, 46))
        # fallback is the mean of a's present January values
        present = [v for v in a_vals if v is not None]
        assert by_slot[40].value == pytest.approx(np.mean(present), abs=1e-9)


class TestPipelineInvariants:
    def gappy_dataset(self, tmp_path, rng):
        a_vals = two_day_values(rng)
        for i in (5, 30, 31, 32, 100):
            a_vals[i] = None
        for i in range(60, 70):
            a_vals[i] = None
        b_vals = two_day_values(rng)
        for i in range(120, 126):
            b_vals[i] = None
        series = [
            make_series(a_vals, station_id="a"),
            make_series(b_vals, station_id="b"),
            make_series(two_day_values(rng), station_id="c"),
        ]
        return write_dataset(tmp_path, series)

    def test_filled_dataset_has_no_gaps(self, tmp_path, rng):
        obs, meta = self.gappy_dataset(tmp_path, rng)
        result = run_pipeline(base_config(tmp_path, obs, meta))
        assert result.exit_code == 0
        from stationfill.ingest import detect_gaps

        for s in parse_observations(tmp_path / "filled.csv"):
            assert detect_gaps(s) == []

    def test_provenance_bijection_with_missing_slots(self, tmp_path, rng):
        obs, meta = self.gappy_dataset(tmp_path, rng)
        result = run_pipeline(base_config(tmp_path, obs, meta))
        original = {
            (s.station_id, s.variable): s for s in parse_observations(obs)
        }
        seen = set()
        for r in result.provenance:
            key = (r.station_id, r.variable, r.imputed.slot)
            assert key not in seen  # each filled slot appears exactly once
            seen.add(key)
            assert original[(r.station_id, r.variable)].value_at(r.imputed.slot) is None
        n_missing = sum(
            len(s) - s.present_count for s in original.values()
        )
        assert len(seen) == n_missing

    def test_idempotent_on_own_output(self, tmp_path, rng):
        obs, meta = self.gappy_dataset(tmp_path, rng)
        first = run_pipeline(base_config(tmp_path, obs, meta))
        assert first.exit_code == 0
        filled_once = (tmp_path / "filled.csv").read_bytes()

        again = PipelineConfig(
            obs_path=tmp_path / "filled.csv",
            meta_path=meta,
            method=Method.NRGC,
            out_path=tmp_path / "filled2.csv",
            provenance_path=tmp_path / "prov2.csv",
        )
        second = run_pipeline(again)
        assert second.provenance == []
        assert (tmp_path / "filled2.csv").read_bytes() == filled_once

    def test_residual_gaps_enumerated_exactly(self, tmp_path, rng):
        # every station missing on the same span: NR cannot fill it, and the
        # output must carry exactly those slots as its remaining gaps
        a_vals = two_day_values(rng)
        b_vals = two_day_values(rng)
        for i in range(100, 106):
            a_vals[i] = None
            b_vals[i] = None
        series = [
            make_series(a_vals, station_id="a"),
            make_series(b_vals, station_id="b"),
        ]
        obs, meta = write_dataset(tmp_path, series, stations=STATIONS[:2])
        result = run_pipeline(base_config(tmp_path, obs, meta, method=Method.NR))
        assert result.exit_code == 2
        residual_slots = {(sid, slot) for sid, _, slot, _ in result.residual}
        assert residual_slots == {
            (sid, slot) for sid in ("a", "b") for slot in range(100, 106)
        }
        from stationfill.ingest import detect_gaps

        leftover = set()
        for s in parse_observations(tmp_path / "filled.csv"):
            for g in detect_gaps(s):
                leftover.update((s.station_id, slot) for slot in g.slots)
        assert leftover == residual_slots

    def test_run_report_structure(self, tmp_path, rng):
        obs, meta = self.gappy_dataset(tmp_path, rng)
        config = base_config(tmp_path, obs, meta)
        result = run_pipeline(config)
        report = result.report_dict(config)
        assert report["n_filled"] == len(result.provenance)
        assert report["n_residual"] == 0
        assert report["fill_counts"]["linear"] >= 1
        assert report["fill_counts"]["nrgc"] >= 1
        assert "validation" in report


class TestAutoSelection:
    def test_auto_picks_and_records_a_method(self, tmp_path, rng):
        a_vals = two_day_values(rng)
        for i in range(60, 70):
            a_vals[i] = None
        series = [
            make_series(a_vals, station_id="a"),
            make_series(two_day_values(rng), station_id="b"),
            make_series(two_day_values(rng), station_id="c"),
        ]
        obs, meta = write_dataset(tmp_path, series)
        config = base_config(tmp_path, obs, meta, method=None)
        r1 = run_pipeline(config)
        r2 = run_pipeline(config)
        key = ("a", Variable.TEMPERATURE)
        assert r1.chosen_methods[key] in NEIGHBOUR_METHODS
        assert r1.chosen_methods == r2.chosen_methods  # deterministic
        assert all(
            r.imputed.method in (r1.chosen_methods[key], Method.LINEAR_INTERP,
                                 Method.LONG_TERM_MEAN)
            for r in r1.provenance
            if r.station_id == "a"
        )


class TestOutOfBoundsPolicy:
    def test_flag_turns_outliers_into_fills(self, tmp_path, rng):
        a_vals = two_day_values(rng)
        a_vals[50] = 999.0  # far outside plausibility bounds
        series = [
            make_series(a_vals, station_id="a"),
            make_series(two_day_values(rng), station_id="b"),
        ]
        obs, meta = write_dataset(tmp_path, series, stations=STATIONS[:2])

        kept = run_pipeline(base_config(tmp_path, obs, meta))
        assert all(r.imputed.slot != 50 for r in kept.provenance)
        filled = parse_observations(tmp_path / "filled.csv")
        a_kept = [s for s in filled if s.station_id == "a"][0]
        assert a_kept.value_at(50) == 999.0  # reported, not removed

        blanked = run_pipeline(
            base_config(
                tmp_path, obs, meta, treat_out_of_bounds_as_missing=True
            )
        )
        assert any(r.imputed.slot == 50 for r in blanked.provenance)

    def test_unknown_station_in_observations_rejected(self, tmp_path, rng):
        series = [make_series(two_day_values(rng), station_id="zz")]
        obs, meta = write_dataset(tmp_path, series, stations=STATIONS[:2])
        with pytest.raises(ConfigError):
            run_pipeline(base_config(tmp_path, obs, meta))

    def test_missing_input_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            PipelineConfig(
                obs_path=tmp_path / "nope.csv",
                meta_path=tmp_path / "also_nope.csv",
            )
