"""Measurement ingestion, canonical trace files, and descriptive statistics.

Two input forms are supported: the JSON document produced by an
isochronous round-trip measurement run (per-packet sequence numbers, a
loss marker, and a round-trip delay in nanoseconds), and the toolkit's
own canonical delimited-text format.  The canonical format is the golden
interchange form:

    index,delay_ns
    0,50000000
    1,-1

with indices consecutive from 0 and -1 marking a lost packet.
"""

from __future__ import annotations

import json
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyTrace, MalformedDocument, NoRecords, ParseError
from .trace import DEFAULT_SEND_INTERVAL_NS, LOSS, DelayTrace, LossIndexing, LossTrace, RawTrace

CANONICAL_HEADER = "index,delay_ns"
LOSS_HEADER = "index,flag"

# Windowed-minimum change threshold for period estimation (2 ms).
DEFAULT_CHANGE_THRESHOLD_NS = 2_000_000


@dataclass
class IngestDiagnostics:
    """What the measurement parser saw, including raw loss markers."""

    records: int = 0
    duplicates: int = 0
    gap_losses: int = 0
    marked_lost: int = 0
    loss_markers: Counter = field(default_factory=Counter)


@dataclass(frozen=True)
class TraceStats:
    count: int
    loss_count: int
    loss_rate: float
    min_ns: int | None
    mean_ns: float | None
    p50_ns: int | None
    p99_ns: int | None
    max_ns: int | None
    windowed_min_series: tuple[tuple[int, int], ...]
    estimated_period: int | None


def _record_is_lost(record: dict) -> tuple[bool, str]:
    """Classify one round-trip record; returns (lost, raw marker)."""
    marker = record.get("lost", None)
    if marker:  # true, "true", "true_down", "true_up" all count as lost
        return True, str(marker)
    rtt = record.get("delay", {}).get("rtt")
    if rtt is None or rtt <= 0:
        return True, "missing_rtt"
    return False, str(marker)


def parse_irtt_detailed(
    document: str | bytes | dict,
    send_interval_ns: int | None = None,
) -> tuple[RawTrace, IngestDiagnostics]:
    """Parse a round-trip measurement document into a raw trace.

    Missing sequence numbers become losses; duplicated sequence numbers
    keep the first record and are counted in the diagnostics.  The send
    interval comes from the document's config when present, else from
    the parameter, else the 10 ms default.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise MalformedDocument(f"not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise MalformedDocument("document root is not an object")
    round_trips = document.get("round_trips")
    if round_trips is None or not isinstance(round_trips, list):
        raise MalformedDocument("document has no round_trips array")
    if not round_trips:
        raise NoRecords("round_trips array is empty")

    diag = IngestDiagnostics()
    by_seq: dict[int, int] = {}
    for record in round_trips:
        if not isinstance(record, dict) or not isinstance(record.get("seqno"), int):
            raise MalformedDocument(f"record without integer seqno: {record!r}")
        seq = record["seqno"]
        diag.records += 1
        if seq in by_seq:
            diag.duplicates += 1
            continue
        lost, marker = _record_is_lost(record)
        diag.loss_markers[marker] += 1
        if lost:
            diag.marked_lost += 1
            by_seq[seq] = LOSS
        else:
            by_seq[seq] = int(record["delay"]["rtt"])

    first = min(by_seq)
    last = max(by_seq)
    entries = []
    for seq in range(first, last + 1):
        if seq in by_seq:
            entries.append(by_seq[seq])
        else:
            diag.gap_losses += 1
            entries.append(LOSS)

    interval = document.get("config", {}).get("interval")
    if not interval:
        interval = send_interval_ns or DEFAULT_SEND_INTERVAL_NS
    return RawTrace(tuple(entries), int(interval)), diag


def parse_irtt(
    document: str | bytes | dict, send_interval_ns: int | None = None
) -> RawTrace:
    raw, _ = parse_irtt_detailed(document, send_interval_ns)
    return raw


def write_canonical(raw: RawTrace, path: str | Path) -> None:
    lines = [CANONICAL_HEADER]
    lines.extend(f"{i},{e}" for i, e in enumerate(raw.entries))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_canonical(
    path: str | Path, send_interval_ns: int = DEFAULT_SEND_INTERVAL_NS
) -> RawTrace:
    entries = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip() != CANONICAL_HEADER:
            raise ParseError(1, f"expected header {CANONICAL_HEADER!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(line_no, f"expected index,delay_ns got {line!r}")
            try:
                idx, value = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(line_no, f"non-integer field in {line!r}") from None
            if idx != len(entries):
                raise ParseError(line_no, f"index {idx} not consecutive from 0")
            entries.append(value)
    return RawTrace(tuple(entries), send_interval_ns)


def write_delay(delays: DelayTrace, path: str | Path) -> None:
    # A delay table is a loss-free trace; the canonical format carries it.
    write_canonical(RawTrace(delays.delays), path)


def read_delay(path: str | Path) -> DelayTrace:
    raw = read_canonical(path)
    return DelayTrace(raw.entries)


def write_loss(loss: LossTrace, path: str | Path) -> None:
    lines = [f"# indexing={loss.indexing.value}", LOSS_HEADER]
    lines.extend(f"{i},{f}" for i, f in enumerate(loss.flags))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_loss(
    path: str | Path, expected_indexing: LossIndexing | None = None
) -> LossTrace:
    flags = []
    indexing = expected_indexing
    with open(path, encoding="utf-8") as fh:
        line_no = 0
        header_seen = False
        for line in fh:
            line_no += 1
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                stated = line.lstrip("#").strip()
                if stated.startswith("indexing="):
                    stated_indexing = LossIndexing(stated.split("=", 1)[1])
                    if expected_indexing and stated_indexing is not expected_indexing:
                        raise ParseError(
                            line_no,
                            f"file is {stated_indexing.value}-indexed, "
                            f"expected {expected_indexing.value}",
                        )
                    indexing = stated_indexing
                continue
            if not header_seen:
                if line != LOSS_HEADER:
                    raise ParseError(line_no, f"expected header {LOSS_HEADER!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(line_no, f"expected index,flag got {line!r}")
            try:
                idx, flag = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(line_no, f"non-integer field in {line!r}") from None
            if idx != len(flags):
                raise ParseError(line_no, f"index {idx} not consecutive from 0")
            flags.append(flag)
        if not header_seen:
            raise ParseError(line_no or 1, "missing header")
    return LossTrace(tuple(flags), indexing or LossIndexing.SEND_ORDER)


def _percentile(sorted_values: list[int], q: float) -> int:
    """Nearest-rank percentile: value at 1-based rank ceil(q * n)."""
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def trace_stats(
    raw: RawTrace,
    window: int,
    change_threshold_ns: int = DEFAULT_CHANGE_THRESHOLD_NS,
) -> TraceStats:
    """Delay/loss statistics plus a windowed-minimum periodicity estimate.

    Delay statistics cover delivered packets only (nearest-rank
    percentiles).  The windowed minimum is taken over consecutive
    windows of ``window`` samples; a change-point is a window whose
    minimum differs from the previous one by more than the threshold,
    and the estimated period is the median change-point spacing in
    samples, reported only when at least three change-points exist.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if not raw.entries:
        raise EmptyTrace("trace has no entries")
    count = len(raw.entries)
    positives = [e for e in raw.entries if e > 0]
    loss_count = sum(1 for e in raw.entries if e == LOSS)

    series = []
    for start in range(0, count, window):
        vals = [e for e in raw.entries[start : start + window] if e > 0]
        if vals:
            series.append((start, min(vals)))

    change_points = []
    for k in range(1, len(series)):
        if abs(series[k][1] - series[k - 1][1]) > change_threshold_ns:
            change_points.append(series[k][0])
    period = None
    if len(change_points) >= 3:
        gaps = [b - a for a, b in zip(change_points, change_points[1:])]
        period = int(statistics.median(gaps))

    if not positives:
        return TraceStats(
            count=count,
            loss_count=loss_count,
            loss_rate=loss_count / count,
            min_ns=None,
            mean_ns=None,
            p50_ns=None,
            p99_ns=None,
            max_ns=None,
            windowed_min_series=tuple(series),
            estimated_period=period,
        )

    ordered = sorted(positives)
    return TraceStats(
        count=count,
        loss_count=loss_count,
        loss_rate=loss_count / count,
        min_ns=ordered[0],
        mean_ns=statistics.fmean(positives),
        p50_ns=_percentile(ordered, 0.50),
        p99_ns=_percentile(ordered, 0.99),
        max_ns=ordered[-1],
        windowed_min_series=tuple(series),
        estimated_period=period,
    )
