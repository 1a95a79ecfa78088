"""Measurement JSON parsing, canonical trace files, and trace statistics."""

import json

import pytest
from hypothesis import given, strategies as st

from satemu.errors import EmptyTrace, MalformedDocument, NoRecords, ParseError
from satemu.ingest import (
    CANONICAL_HEADER,
    DEFAULT_CHANGE_THRESHOLD_NS,
    parse_irtt,
    parse_irtt_detailed,
    read_canonical,
    read_delay,
    read_loss,
    trace_stats,
    write_canonical,
    write_delay,
    write_loss,
)
from satemu.trace import DelayTrace, LossIndexing, LossTrace, RawTrace

MS = 1_000_000


def rt(seq, rtt=None, lost=None):
    record = {"seqno": seq}
    if lost is not None:
        record["lost"] = lost
    if rtt is not None:
        record["delay"] = {"rtt": rtt}
    return record


def doc(records, interval=None):
    d = {"round_trips": records}
    if interval is not None:
        d["config"] = {"interval": interval}
    return d


# ------------------------------------------------------------ measurement

def test_parse_basic_document():
    raw = parse_irtt(
        doc([rt(0, 50 * MS), rt(1, lost=True), rt(2, 60 * MS)], interval=10 * MS)
    )
    assert raw.entries == (50 * MS, -1, 60 * MS)
    assert raw.send_interval_ns == 10 * MS


def test_parse_fills_sequence_gaps_as_losses():
    raw, diag = parse_irtt_detailed(doc([rt(0, 5 * MS), rt(2, 6 * MS)]))
    assert raw.entries == (5 * MS, -1, 6 * MS)
    assert diag.gap_losses == 1
    assert diag.marked_lost == 0


def test_parse_keeps_first_of_duplicate_seqnos():
    raw, diag = parse_irtt_detailed(doc([rt(0, 5 * MS), rt(0, 9 * MS)]))
    assert raw.entries == (5 * MS,)
    assert diag.duplicates == 1
    assert diag.records == 2


@pytest.mark.parametrize("marker", [True, "true", "true_down", "true_up"])
def test_parse_accepts_directional_loss_markers(marker):
    raw, diag = parse_irtt_detailed(doc([rt(0, 5 * MS), rt(1, lost=marker)]))
    assert raw.entries == (5 * MS, -1)
    assert diag.loss_markers[str(marker)] == 1


def test_parse_lost_false_with_rtt_is_delivered():
    raw = parse_irtt(doc([rt(0, 5 * MS, lost=False)]))
    assert raw.entries == (5 * MS,)


def test_parse_missing_rtt_counts_as_lost():
    raw, diag = parse_irtt_detailed(doc([rt(0, 5 * MS), rt(1)]))
    assert raw.entries == (5 * MS, -1)
    assert diag.loss_markers["missing_rtt"] == 1


def test_parse_seqnos_are_rebased_to_the_first():
    raw = parse_irtt(doc([rt(5, 5 * MS), rt(7, 7 * MS)]))
    assert raw.entries == (5 * MS, -1, 7 * MS)


def test_parse_interval_precedence():
    # document config wins over the parameter, parameter over the default
    assert parse_irtt(doc([rt(0, 5)], interval=3 * MS), 7 * MS).send_interval_ns == 3 * MS
    assert parse_irtt(doc([rt(0, 5)]), 7 * MS).send_interval_ns == 7 * MS
    assert parse_irtt(doc([rt(0, 5)])).send_interval_ns == 10 * MS


def test_parse_accepts_str_and_bytes():
    text = json.dumps(doc([rt(0, 5 * MS)]))
    assert parse_irtt(text).entries == (5 * MS,)
    assert parse_irtt(text.encode()).entries == (5 * MS,)


def test_parse_rejects_invalid_json():
    with pytest.raises(MalformedDocument):
        parse_irtt("{not json")


def test_parse_rejects_non_object_root():
    with pytest.raises(MalformedDocument):
        parse_irtt("[1, 2]")


def test_parse_rejects_missing_round_trips():
    with pytest.raises(MalformedDocument):
        parse_irtt({"config": {}})


def test_parse_rejects_empty_round_trips():
    with pytest.raises(NoRecords):
        parse_irtt({"round_trips": []})


def test_parse_rejects_record_without_seqno():
    with pytest.raises(MalformedDocument):
        parse_irtt({"round_trips": [{"delay": {"rtt": 5}}]})


# -------------------------------------------------------- canonical files

def test_write_canonical_golden_bytes(tmp_path):
    path = tmp_path / "t.csv"
    write_canonical(RawTrace((50_000_000, -1)), path)
    assert path.read_text() == "index,delay_ns\n0,50000000\n1,-1\n"


def test_read_canonical_roundtrip(tmp_path):
    raw = RawTrace((50 * MS, -1, 60 * MS), 7 * MS)
    path = tmp_path / "t.csv"
    write_canonical(raw, path)
    back = read_canonical(path, 7 * MS)
    assert back.entries == raw.entries
    assert back.send_interval_ns == 7 * MS


@given(st.lists(st.one_of(st.just(-1), st.integers(1, 2**40)), min_size=0, max_size=50))
def test_canonical_roundtrip_property(tmp_path_factory, entries):
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    write_canonical(RawTrace(tuple(entries)), path)
    assert read_canonical(path).entries == tuple(entries)


def test_canonical_roundtrip_large(tmp_path):
    entries = tuple(range(1, 10_001))
    path = tmp_path / "big.csv"
    write_canonical(RawTrace(entries), path)
    assert read_canonical(path).entries == entries


def test_read_canonical_rejects_wrong_header(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("delay_ns,index\n0,5\n")
    with pytest.raises(ParseError) as exc:
        read_canonical(path)
    assert exc.value.line_no == 1


def test_read_canonical_reports_bad_line_number(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(f"{CANONICAL_HEADER}\n0,5\n1,abc\n")
    with pytest.raises(ParseError) as exc:
        read_canonical(path)
    assert exc.value.line_no == 3


def test_read_canonical_rejects_non_consecutive_index(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(f"{CANONICAL_HEADER}\n0,5\n2,6\n")
    with pytest.raises(ParseError) as exc:
        read_canonical(path)
    assert "not consecutive" in str(exc.value)


def test_read_canonical_rejects_extra_fields(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(f"{CANONICAL_HEADER}\n0,5,9\n")
    with pytest.raises(ParseError):
        read_canonical(path)


def test_read_canonical_tolerates_blank_lines(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(f"{CANONICAL_HEADER}\n0,5\n\n1,6\n")
    assert read_canonical(path).entries == (5, 6)


def test_delay_file_roundtrip(tmp_path):
    delays = DelayTrace((5 * MS, 6 * MS))
    path = tmp_path / "d.csv"
    write_delay(delays, path)
    assert read_delay(path).delays == delays.delays


def test_loss_file_golden_and_roundtrip(tmp_path):
    loss = LossTrace((0, 1), LossIndexing.ARRIVAL_ORDER)
    path = tmp_path / "l.csv"
    write_loss(loss, path)
    assert path.read_text() == "# indexing=arrival\nindex,flag\n0,0\n1,1\n"
    back = read_loss(path)
    assert back.flags == (0, 1)
    assert back.indexing is LossIndexing.ARRIVAL_ORDER


def test_loss_file_send_order_roundtrip(tmp_path):
    path = tmp_path / "l.csv"
    write_loss(LossTrace((1, 0)), path)
    back = read_loss(path, LossIndexing.SEND_ORDER)
    assert back.indexing is LossIndexing.SEND_ORDER


def test_read_loss_rejects_wrong_indexing(tmp_path):
    path = tmp_path / "l.csv"
    write_loss(LossTrace((0,), LossIndexing.SEND_ORDER), path)
    with pytest.raises(ParseError):
        read_loss(path, LossIndexing.ARRIVAL_ORDER)


def test_read_loss_without_comment_uses_expected(tmp_path):
    path = tmp_path / "l.csv"
    path.write_text("index,flag\n0,1\n")
    assert read_loss(path, LossIndexing.ARRIVAL_ORDER).indexing is LossIndexing.ARRIVAL_ORDER
    assert read_loss(path).indexing is LossIndexing.SEND_ORDER


def test_read_loss_missing_header(tmp_path):
    path = tmp_path / "l.csv"
    path.write_text("# indexing=send\n")
    with pytest.raises(ParseError):
        read_loss(path)


# -------------------------------------------------------------- statistics

def test_stats_constant_trace():
    stats = trace_stats(RawTrace((40 * MS,) * 10), window=5)
    assert stats.count == 10
    assert stats.loss_count == 0
    assert stats.loss_rate == 0.0
    assert stats.min_ns == stats.p50_ns == stats.p99_ns == stats.max_ns == 40 * MS
    assert stats.mean_ns == 40 * MS
    assert stats.windowed_min_series == ((0, 40 * MS), (5, 40 * MS))
    assert stats.estimated_period is None


def test_stats_loss_rate():
    entries = (5 * MS,) * 9 + (-1,)
    assert trace_stats(RawTrace(entries), window=10).loss_rate == 0.1


def test_stats_percentiles_nearest_rank():
    # delays 1..100: nearest-rank p50 is the 50th value, p99 the 99th
    entries = tuple(range(1, 101))
    stats = trace_stats(RawTrace(entries), window=100)
    assert stats.min_ns == 1
    assert stats.p50_ns == 50
    assert stats.p99_ns == 99
    assert stats.max_ns == 100


def test_stats_single_sample_percentiles():
    stats = trace_stats(RawTrace((7,)), window=1)
    assert stats.p50_ns == stats.p99_ns == 7


def test_stats_windowed_min_skips_loss_only_windows():
    stats = trace_stats(RawTrace((40 * MS, -1, -1, 50 * MS)), window=2)
    assert stats.windowed_min_series == ((0, 40 * MS), (2, 50 * MS))


def test_stats_detects_floor_step_period():
    # floors alternate every 150 samples; change-points land on each
    # boundary, so the median spacing is the period itself
    entries = []
    for i in range(1200):
        floor = 30 * MS if (i // 150) % 2 == 0 else 45 * MS
        entries.append(floor + (i % 7) * 1000)
    stats = trace_stats(RawTrace(tuple(entries)), window=50)
    assert stats.estimated_period == 150


def test_stats_steps_below_threshold_are_not_change_points():
    entries = []
    for i in range(600):
        floor = 30 * MS if (i // 100) % 2 == 0 else 30 * MS + 1 * MS
        entries.append(floor)
    stats = trace_stats(
        RawTrace(tuple(entries)), window=50, change_threshold_ns=DEFAULT_CHANGE_THRESHOLD_NS
    )
    assert stats.estimated_period is None


def test_stats_needs_three_change_points():
    # one step up, one step down: only two change-points, no estimate
    entries = (30 * MS,) * 100 + (45 * MS,) * 100 + (30 * MS,) * 100
    stats = trace_stats(RawTrace(entries), window=50)
    assert stats.estimated_period is None


def test_stats_all_lost_reports_none_delay_fields():
    stats = trace_stats(RawTrace((-1, -1)), window=1)
    assert stats.loss_rate == 1.0
    assert stats.min_ns is None
    assert stats.mean_ns is None
    assert stats.p50_ns is None
    assert stats.p99_ns is None
    assert stats.max_ns is None
    assert stats.windowed_min_series == ()


def test_stats_empty_trace_rejected():
    with pytest.raises(EmptyTrace):
        trace_stats(RawTrace(()), window=1)


def test_stats_rejects_bad_window():
    with pytest.raises(ValueError):
        trace_stats(RawTrace((5,)), window=0)
