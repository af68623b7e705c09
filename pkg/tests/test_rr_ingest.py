import pytest

from hrvsonify import (
    DataError,
    RRSeries,
    filter_artifacts,
    parse_rr_file,
    write_rr_file,
)
from hrvsonify.errors import ConfigError


def write(tmp_path, text, name="rec.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_seconds(tmp_path):
    p = write(tmp_path, "0.8\n0.85\n0.8\n")
    series = parse_rr_file(p, unit="s")
    assert series.intervals_ms == (800.0, 850.0, 800.0)
    assert series.label == "rec"
    assert series.source_path == str(p)


def test_parse_skips_comments_and_blank_lines(tmp_path):
    p = write(tmp_path, "# hdr\n800\n\n860\n800\n")
    series = parse_rr_file(p, unit="ms")
    assert series.intervals_ms == (800.0, 860.0, 800.0)


def test_parse_two_column_takes_second_field(tmp_path):
    p = write(tmp_path, "0.0 0.8\n0.8,0.9\n1.7 0.85\n")
    series = parse_rr_file(p, unit="s")
    assert series.intervals_ms == (800.0, 900.0, 850.0)


def test_parse_negative_interval_reports_line(tmp_path):
    p = write(tmp_path, "0.8\n-0.2\n0.9\n")
    with pytest.raises(DataError, match=":2:"):
        parse_rr_file(p, unit="s")


def test_parse_non_numeric_reports_line(tmp_path):
    p = write(tmp_path, "800\nbogus\n900\n")
    with pytest.raises(DataError, match=":2:.*bogus"):
        parse_rr_file(p, unit="ms")


def test_parse_too_few_intervals(tmp_path):
    p = write(tmp_path, "# only one\n800\n")
    with pytest.raises(DataError, match="at least 2"):
        parse_rr_file(p, unit="ms")


def test_parse_bad_unit(tmp_path):
    p = write(tmp_path, "800\n900\n")
    with pytest.raises(ConfigError):
        parse_rr_file(p, unit="furlongs")


def test_parse_too_many_fields(tmp_path):
    p = write(tmp_path, "1 2 3\n")
    with pytest.raises(DataError, match="1 or 2 fields"):
        parse_rr_file(p, unit="ms")


def test_series_rejects_nonpositive():
    with pytest.raises(DataError):
        RRSeries((800.0, 0.0, 900.0))
    with pytest.raises(DataError):
        RRSeries((800.0, float("nan")))


def test_filter_removes_out_of_range():
    series = RRSeries((800.0, 5000.0, 820.0), label="x")
    kept, removed = filter_artifacts(series, 300.0, 2000.0)
    assert kept.intervals_ms == (800.0, 820.0)
    assert removed == 1
    assert kept.label == "x"


def test_filter_identity():
    series = RRSeries((800.0, 820.0))
    kept, removed = filter_artifacts(series, 300.0, 2000.0)
    assert kept.intervals_ms == series.intervals_ms
    assert removed == 0


def test_filter_too_short_result():
    series = RRSeries((5000.0, 6000.0))
    with pytest.raises(DataError, match="fewer than 2"):
        filter_artifacts(series, 300.0, 2000.0)


def test_filter_bad_bounds():
    series = RRSeries((800.0, 820.0))
    with pytest.raises(ConfigError):
        filter_artifacts(series, 2000.0, 300.0)


def test_filter_idempotent():
    series = RRSeries((800.0, 2500.0, 820.0, 250.0, 900.0))
    once, _ = filter_artifacts(series)
    twice, removed = filter_artifacts(once)
    assert twice.intervals_ms == once.intervals_ms
    assert removed == 0


def test_filter_preserves_order():
    series = RRSeries((900.0, 5000.0, 700.0, 100.0, 1100.0))
    kept, _ = filter_artifacts(series)
    assert kept.intervals_ms == (900.0, 700.0, 1100.0)


def test_write_parse_round_trip(tmp_path):
    series = RRSeries((800.0, 860.123456789, 793.4567890123), label="rt")
    dest = tmp_path / "rt.txt"
    write_rr_file(series, dest)
    back = parse_rr_file(dest, unit="ms", label="rt")
    assert back.intervals_ms == series.intervals_ms
