import json
from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stationfill.errors import (
    CoordinateOutOfRange,
    DuplicateSlot,
    DuplicateStationId,
    MalformedRow,
    OffGridTimestamp,
    UnknownVariable,
    UnparseableValue,
)
from stationfill.ingest import (
    detect_gaps,
    parse_observations,
    parse_station_meta,
    validate,
    write_observations,
)
from stationfill.model import UTC, GapClass, Variable

from conftest import make_series


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def obs_csv(rows):
    return "station_id,timestamp,variable,value\n" + "".join(r + "\n" for r in rows)


def full_year_rows(station, variable, year, days, value="5.0"):
    """Complete 15-min rows covering `days` days starting Jan 1."""
    rows = []
    t = datetime(year, 1, 1, tzinfo=UTC)
    step = timedelta(minutes=15)
    for _ in range(days * 96):
        rows.append(f"{station},{t.strftime('%Y-%m-%dT%H:%M:%SZ')},{variable},{value}")
        t += step
    return rows


class TestParseStationMeta:
    def test_table_coordinates(self, tmp_path):
        p = write(
            tmp_path,
            "meta.csv",
            'station_id,longitude,latitude,label\n'
            's2n1,-1.524,52.057,"1st nearest"\n',
        )
        (meta,) = parse_station_meta(p)
        assert meta.longitude == -1.524
        assert meta.latitude == 52.057
        assert meta.label == "1st nearest"

    def test_latitude_91_rejected(self, tmp_path):
        p = write(
            tmp_path,
            "meta.csv",
            "station_id,longitude,latitude,label\na,0.0,91,\n",
        )
        with pytest.raises(CoordinateOutOfRange):
            parse_station_meta(p)

    def test_duplicate_id_rejected(self, tmp_path):
        p = write(
            tmp_path,
            "meta.csv",
            "station_id,longitude,latitude,label\na,0,0,\na,1,1,\n",
        )
        with pytest.raises(DuplicateStationId):
            parse_station_meta(p)

    def test_malformed_row_reports_line(self, tmp_path):
        p = write(
            tmp_path,
            "meta.csv",
            "station_id,longitude,latitude,label\na,0,0,\nb,not_a_number,0,\n",
        )
        with pytest.raises(MalformedRow) as err:
            parse_station_meta(p)
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        p = write(tmp_path, "meta.csv", "id,lon,lat\n")
        with pytest.raises(MalformedRow):
            parse_station_meta(p)


class TestParseObservations:
    def test_complete_year_has_35040_present_slots(self, tmp_path):
        p = write(tmp_path, "obs.csv", obs_csv(full_year_rows("a", "temperature", 2014, 365)))
        (s,) = parse_observations(p)
        assert len(s) == 35040
        assert s.present_count == 35040

    def test_leap_year_has_35136_slots(self, tmp_path):
        p = write(tmp_path, "obs.csv", obs_csv(full_year_rows("a", "temperature", 2016, 366)))
        (s,) = parse_observations(p)
        assert len(s) == 35136
        assert s.present_count == 35136

    def test_duplicate_slot_rejected(self, tmp_path):
        p = write(
            tmp_path,
            "obs.csv",
            obs_csv(
                [
                    "a,2014-01-01T00:00:00Z,temperature,1.0",
                    "a,2014-01-01T00:00:00Z,temperature,2.0",
                ]
            ),
        )
        with pytest.raises(DuplicateSlot):
            parse_observations(p)

    def test_off_grid_timestamp_rejected(self, tmp_path):
        p = write(
            tmp_path,
            "obs.csv",
            obs_csv(
                [
                    "a,2014-01-01T00:00:00Z,temperature,1.0",
                    "a,2014-01-01T00:07:00Z,temperature,2.0",
                ]
            ),
        )
        with pytest.raises(OffGridTimestamp):
            parse_observations(p)

    def test_unknown_variable_rejected(self, tmp_path):
        p = write(tmp_path, "obs.csv", obs_csv(["a,2014-01-01T00:00:00Z,humidity,1.0"]))
        with pytest.raises(UnknownVariable):
            parse_observations(p)

    def test_unparseable_value_rejected(self, tmp_path):
        p = write(tmp_path, "obs.csv", obs_csv(["a,2014-01-01T00:00:00Z,temperature,n/a"]))
        with pytest.raises(UnparseableValue):
            parse_observations(p)

    def test_null_and_empty_both_missing_counted_apart(self, tmp_path):
        p = write(
            tmp_path,
            "obs.csv",
            obs_csv(
                [
                    "a,2014-01-01T00:00:00Z,temperature,1.0",
                    "a,2014-01-01T00:15:00Z,temperature,null",
                    "a,2014-01-01T00:30:00Z,temperature,",
                    "a,2014-01-01T00:45:00Z,temperature,2.0",
                ]
            ),
        )
        (s,) = parse_observations(p)
        assert s.value_at(1) is None
        assert s.value_at(2) is None
        assert s.null_slots == frozenset([1])

    def test_grid_anchored_at_midnight_of_earliest(self, tmp_path):
        # first row at 01:00 -> anchor is still 00:00 of that day
        p = write(tmp_path, "obs.csv", obs_csv(["a,2014-01-01T01:00:00Z,temperature,1.0"]))
        (s,) = parse_observations(p)
        assert s.start == datetime(2014, 1, 1, tzinfo=UTC)
        assert s.value_at(4) == 1.0
        assert len(s) == 96  # padded to the whole day

    def test_strict_timestamp_format(self, tmp_path):
        p = write(tmp_path, "obs.csv", obs_csv(["a,2014-01-01 00:00:00Z,temperature,1.0"]))
        with pytest.raises(MalformedRow):
            parse_observations(p)


class TestDetectGaps:
    def test_three_slot_gap_is_short(self):
        s = make_series([1.0, None, None, None, 1.0])
        (g,) = detect_gaps(s)
        assert (g.first_slot, g.length, g.kind) == (1, 3, GapClass.SHORT)

    def test_four_slot_gap_is_long(self):
        # 60 minutes is not strictly less than one hour
        s = make_series([1.0, None, None, None, None, 1.0])
        (g,) = detect_gaps(s)
        assert (g.first_slot, g.length, g.kind) == (1, 4, GapClass.LONG)

    def test_fully_present_series_has_no_gaps(self):
        assert detect_gaps(make_series([1.0, 2.0, 3.0])) == []

    def test_gaps_at_edges_and_interior(self):
        s = make_series([None, 1.0, None, None, 1.0, None, None, None, None])
        gaps = detect_gaps(s)
        assert [(g.first_slot, g.length) for g in gaps] == [(0, 1), (2, 2), (5, 4)]
        assert [g.kind for g in gaps] == [GapClass.SHORT, GapClass.SHORT, GapClass.LONG]


class TestValidate:
    def test_partial_year_295_days(self):
        s = make_series(np.zeros(295 * 96), start=datetime(2018, 1, 1, tzinfo=UTC))
        report = validate([s])
        (cell,) = report.cells
        assert cell.year == 2018
        assert cell.expected_records == 28320
        assert cell.present_records == 28320

    @pytest.mark.parametrize(
        "year,days,expected",
        [(2014, 365, 35040), (2015, 365, 35040), (2016, 366, 35136),
         (2017, 365, 35040), (2018, 295, 28320)],
    )
    def test_table_of_expected_records(self, year, days, expected):
        s = make_series(np.zeros(days * 96), start=datetime(year, 1, 1, tzinfo=UTC))
        (cell,) = validate([s]).cells
        assert cell.expected_records == expected

    def test_inclusive_bounds(self):
        # max temperature exactly at the upper bound is in bounds
        s = make_series([60.0, -35.2, 60.1, -35.3] + [0.0] * 92)
        (cell,) = validate([s], {Variable.TEMPERATURE: (-35.2, 60.0)}).cells
        assert cell.out_of_bounds_records == 2

    def test_out_of_bounds_not_removed(self):
        s = make_series([100.0] + [0.0] * 95)
        (cell,) = validate([s]).cells
        assert cell.out_of_bounds_records == 1
        assert cell.present_records == 96

    def test_empty_series(self):
        s = make_series([])
        (cell,) = validate([s]).cells
        assert cell.expected_records == 0
        assert cell.present_records == 0
        assert cell.gap_histogram == {}

    def test_every_slot_accounted_once(self):
        values = [1.0, None, None, 2.0] * 24  # one day
        s = make_series(values, null_slots=[1])
        (cell,) = validate([s]).cells
        assert cell.expected_records == 96
        assert (
            cell.present_records + cell.null_records + cell.missing_records
            == cell.expected_records
        )
        assert cell.null_records == 1

    def test_gap_sum_matches_missing_plus_null(self):
        values = [1.0, None, None, 2.0, None, 3.0] * 16  # one day
        s = make_series(values, null_slots=[1, 4])
        (cell,) = validate([s]).cells
        gap_total = sum(g.length for g in detect_gaps(s))
        assert gap_total == cell.missing_records + cell.null_records

    def test_multi_year_series_split_by_calendar_year(self):
        days = 365 + 366  # 2015 + 2016
        s = make_series(np.zeros(days * 96), start=datetime(2015, 1, 1, tzinfo=UTC))
        cells = validate([s]).cells
        assert [(c.year, c.expected_records) for c in cells] == [
            (2015, 35040),
            (2016, 35136),
        ]

    def test_bounds_must_be_ordered(self):
        with pytest.raises(ValueError):
            validate([make_series([0.0])], {Variable.TEMPERATURE: (10.0, -10.0)})

    def test_json_stable(self):
        s = make_series([1.0, None, 2.0] + [0.0] * 93, null_slots=[1])
        r1 = validate([s]).to_json()
        r2 = validate([s]).to_json()
        assert r1 == r2
        parsed = json.loads(r1)
        assert list(parsed.keys()) == ["bounds", "cells"]


def _value_strategy():
    return st.one_of(
        st.none(),
        st.floats(
            min_value=-50.0, max_value=50.0,
            allow_nan=False, allow_infinity=False,
        ),
    )


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(
        values=st.lists(_value_strategy(), min_size=1, max_size=64),
        variable=st.sampled_from(list(Variable)),
        null_choice=st.randoms(use_true_random=False),
    )
    def test_write_then_parse_is_identity(self, tmp_path_factory, values, variable, null_choice):
        # whole-day padding happens at parse; write a pre-padded series
        per_day = 96
        n = -(-len(values) // per_day) * per_day
        padded = list(values) + [None] * (n - len(values))
        missing = [i for i, v in enumerate(padded) if v is None]
        nulls = [i for i in missing if null_choice.random() < 0.5]
        if variable is Variable.RAINFALL:
            padded = [abs(v) if v is not None else None for v in padded]
        series = make_series(padded, variable=variable, null_slots=nulls)
        path = tmp_path_factory.mktemp("rt") / "obs.csv"
        write_observations(path, [series])
        (parsed,) = parse_observations(path)
        assert parsed == series

    def test_round_trip_multiple_series(self, tmp_path):
        a = make_series([1.5, None, 2.5] + [0.0] * 93, station_id="a", null_slots=[1])
        b = make_series(
            [0.0, 0.25, None] + [0.1] * 93,
            station_id="b",
            variable=Variable.RAINFALL,
        )
        path = tmp_path / "obs.csv"
        write_observations(path, [a, b])
        parsed = parse_observations(path)
        assert parsed == [a, b]

    def test_canonical_output_is_fixed_point(self, tmp_path):
        s = make_series([1.0, None, 3.25] + [7.0] * 93, null_slots=[1])
        p1 = tmp_path / "one.csv"
        p2 = tmp_path / "two.csv"
        write_observations(p1, [s])
        write_observations(p2, parse_observations(p1))
        assert p1.read_bytes() == p2.read_bytes()
