"""Ingestion, time axis, and windowing."""

import datetime
import io

import numpy as np
import pytest

from logperiodic import (
    DomainError,
    DuplicateTimestampError,
    EmptyInputError,
    FormatError,
    InsufficientDataError,
    TimeSeries,
    Window,
    day_offset,
    log_transform,
    offset_date,
    parse_csv,
    parse_time,
)


class TestTimeAxis:
    def test_epoch_is_day_zero(self):
        assert day_offset(datetime.date(1970, 1, 1)) == 0.0

    def test_offset_round_trip(self):
        for d in (
            datetime.date(1970, 1, 2),
            datetime.date(2009, 9, 25),
            datetime.date(1969, 12, 31),
            datetime.date(2010, 3, 1),
        ):
            assert offset_date(day_offset(d)) == d

    def test_fractional_offset_floors(self):
        assert offset_date(0.75) == datetime.date(1970, 1, 1)
        assert offset_date(-0.25) == datetime.date(1969, 12, 31)

    def test_parse_time_iso_date(self):
        assert parse_time("2009-09-25") == day_offset(datetime.date(2009, 9, 25))

    def test_parse_time_bare_number(self):
        assert parse_time("385") == 385.0
        assert parse_time(" -12.5 ") == -12.5

    def test_parse_time_rejects_junk(self):
        with pytest.raises(FormatError):
            parse_time("next tuesday")
        with pytest.raises(FormatError):
            parse_time("inf")


class TestWindow:
    def test_span_and_contains(self):
        w = Window(10.0, 30.0)
        assert w.span == 20.0
        assert w.contains(10.0) and w.contains(30.0) and w.contains(20.0)
        assert not w.contains(9.999) and not w.contains(30.001)

    def test_rejects_empty_or_reversed(self):
        with pytest.raises(ValueError):
            Window(5.0, 5.0)
        with pytest.raises(ValueError):
            Window(6.0, 5.0)
        with pytest.raises(ValueError):
            Window(0.0, float("inf"))


class TestTimeSeries:
    def test_basic_construction(self):
        s = TimeSeries([0.0, 1.0, 2.0], [10.0, 11.0, 12.0])
        assert len(s) == 3
        assert s.t_start == 0.0 and s.t_end == 2.0 and s.span == 2.0

    def test_needs_two_points(self):
        with pytest.raises(InsufficientDataError):
            TimeSeries([1.0], [2.0])

    def test_rejects_duplicate_times(self):
        with pytest.raises(DuplicateTimestampError):
            TimeSeries([0.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_rejects_unsorted_times(self):
        with pytest.raises(ValueError):
            TimeSeries([2.0, 1.0, 3.0], [1.0, 2.0, 3.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            TimeSeries([0.0, 1.0], [1.0, float("nan")])
        with pytest.raises(ValueError):
            TimeSeries([0.0, float("inf")], [1.0, 2.0])

    def test_arrays_are_immutable_copies(self):
        t = np.array([0.0, 1.0, 2.0])
        v = np.array([1.0, 2.0, 3.0])
        s = TimeSeries(t, v)
        t[0] = 99.0
        assert s.t[0] == 0.0
        with pytest.raises(ValueError):
            s.value[0] = -1.0

    def test_iteration_yields_points(self):
        s = TimeSeries([0.0, 1.0], [5.0, 6.0])
        points = list(s)
        assert points[0].t == 0.0 and points[0].value == 5.0

    def test_slice_is_inclusive(self):
        s = TimeSeries([0.0, 1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0, 5.0])
        cut = s.slice(Window(1.0, 3.0))
        assert list(cut.t) == [1.0, 2.0, 3.0]

    def test_slice_too_narrow(self):
        s = TimeSeries([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(InsufficientDataError):
            s.slice(Window(0.5, 0.9))


class TestLogTransform:
    def test_values_are_logged(self):
        s = TimeSeries([0.0, 1.0], [1.0, np.e])
        out = log_transform(s)
        assert out.value[0] == 0.0
        assert out.value[1] == pytest.approx(1.0, rel=1e-15)
        assert list(out.t) == [0.0, 1.0]

    def test_rejects_non_positive(self):
        with pytest.raises(DomainError):
            log_transform(TimeSeries([0.0, 1.0], [1.0, 0.0]))


CSV = """date,open,close
2009-03-02,700.0,701.5
2009-03-01,690.0,696.25
2009-03-03,702.0,703.125
"""


class TestParseCsv:
    def test_happy_path_sorts_by_date(self):
        result = parse_csv(CSV)
        assert result.skipped == 0
        assert len(result.series) == 3
        assert result.series.value[0] == 696.25
        assert result.series.t[0] == day_offset(datetime.date(2009, 3, 1))

    def test_accepts_file_object(self):
        result = parse_csv(io.StringIO(CSV))
        assert len(result.series) == 3

    def test_value_column_selection(self):
        result = parse_csv(CSV, value_column="open")
        assert result.series.value[0] == 690.0

    def test_missing_value_column_in_header(self):
        with pytest.raises(FormatError):
            parse_csv("date,close\n2009-01-01,1.0\n", value_column="volume")

    def test_missing_date_column(self):
        with pytest.raises(FormatError):
            parse_csv("day,close\n2009-01-01,1.0\n")

    def test_bad_date_reports_line_number(self):
        bad = "date,close\n2009-01-01,1.0\n01/02/2009,2.0\n"
        with pytest.raises(FormatError, match="line 3"):
            parse_csv(bad)

    def test_unparseable_values_are_skipped_and_counted(self):
        text = "date,close\n2009-01-01,1.0\n2009-01-02,n/a\n2009-01-03,\n2009-01-04,2.0\n"
        result = parse_csv(text)
        assert result.skipped == 2
        assert len(result.series) == 2

    def test_non_positive_price_rejected(self):
        with pytest.raises(FormatError):
            parse_csv("date,close\n2009-01-01,1.0\n2009-01-02,0.0\n")
        with pytest.raises(FormatError):
            parse_csv("date,close\n2009-01-01,1.0\n2009-01-02,-3.5\n")

    def test_duplicate_dates_rejected_by_name(self):
        dup = "date,close\n2009-01-01,1.0\n2009-01-02,2.0\n2009-01-02,3.0\n"
        with pytest.raises(DuplicateTimestampError, match="2009-01-02"):
            parse_csv(dup)

    def test_no_data_rows(self):
        with pytest.raises(EmptyInputError):
            parse_csv("date,close\n")

    def test_all_rows_skipped(self):
        with pytest.raises(EmptyInputError):
            parse_csv("date,close\n2009-01-01,n/a\n2009-01-02,\n")
