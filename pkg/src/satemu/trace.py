"""Canonical per-packet trace representation and its transforms.

A link trace is an ordered list of per-packet entries: a positive delay in
nanoseconds for a delivered packet, or -1 for a lost one.  The transforms
here split such a trace into a pure delay table plus a binary loss table,
compute the receiver-side arrival order, re-key the loss table by arrival
rank, and invert the split for round-trip testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import AllLost, EmptyTrace, InvalidEntry, LengthMismatch, WrongIndexing

# Probing interval used throughout when no explicit value is given (10 ms).
DEFAULT_SEND_INTERVAL_NS = 10_000_000

LOSS = -1

# Kernel map values are 32-bit, capping encodable delays at ~4.294 s.
U32_MAX = 2**32 - 1


class LossIndexing(Enum):
    SEND_ORDER = "send"
    ARRIVAL_ORDER = "arrival"


@dataclass(frozen=True)
class RawTrace:
    """Ordered per-packet entries: delay in ns (> 0) or -1 for loss.

    Entry validity is checked by the transforms (and reported by
    ``validate``), not at construction, so that diagnostic tooling can
    hold malformed measurement data.
    """

    entries: tuple[int, ...]
    send_interval_ns: int = DEFAULT_SEND_INTERVAL_NS

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.send_interval_ns <= 0:
            raise ValueError("send_interval_ns must be positive")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DelayTrace:
    """Per-packet delays in ns, keyed by send order; strictly positive."""

    delays: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "delays", tuple(self.delays))
        for i, d in enumerate(self.delays):
            if d <= 0:
                raise InvalidEntry(i, d)

    def __len__(self) -> int:
        return len(self.delays)


@dataclass(frozen=True)
class LossTrace:
    """Binary loss flags plus a record of what the flags are keyed by."""

    flags: tuple[int, ...]
    indexing: LossIndexing = LossIndexing.SEND_ORDER

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(self.flags))
        for i, f in enumerate(self.flags):
            if f not in (0, 1):
                raise InvalidEntry(i, f)

    def __len__(self) -> int:
        return len(self.flags)

    @property
    def loss_count(self) -> int:
        return sum(self.flags)


@dataclass(frozen=True)
class ArrivalPermutation:
    """order[k] = sender index of the k-th packet to arrive."""

    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        n = len(self.order)
        if sorted(self.order) != list(range(n)):
            raise ValueError("order is not a permutation of 0..n-1")

    def __len__(self) -> int:
        return len(self.order)

    def inverse(self) -> ArrivalPermutation:
        inv = [0] * len(self.order)
        for rank, idx in enumerate(self.order):
            inv[idx] = rank
        return ArrivalPermutation(tuple(inv))


@dataclass(frozen=True)
class TraceDiagnostics:
    entries: int
    losses: int
    invalid: int
    fits_32bit: bool


def _checked_entries(raw: RawTrace) -> tuple[int, ...]:
    if not raw.entries:
        raise EmptyTrace("trace has no entries")
    for i, e in enumerate(raw.entries):
        if e != LOSS and e <= 0:
            raise InvalidEntry(i, e)
    return raw.entries


def split_trace(raw: RawTrace) -> tuple[DelayTrace, LossTrace]:
    """Split a raw trace into a delay table and send-order loss flags.

    A lost packet inherits the delay of its nearest preceding delivered
    packet, which keeps lost packets arriving in their original order;
    losses at the head of the trace carry back the first delivered delay.
    """
    entries = _checked_entries(raw)
    first_positive = next((e for e in entries if e > 0), None)
    if first_positive is None:
        raise AllLost("trace contains no delivered packet")
    delays = []
    flags = []
    last = first_positive
    for e in entries:
        if e > 0:
            last = e
            delays.append(e)
            flags.append(0)
        else:
            delays.append(last)
            flags.append(1)
    return DelayTrace(tuple(delays)), LossTrace(tuple(flags), LossIndexing.SEND_ORDER)


def arrival_times(delays: DelayTrace, send_interval_ns: int) -> tuple[int, ...]:
    """arrival_time_i = i * interval + delay_i on the virtual clock."""
    return tuple(i * send_interval_ns + d for i, d in enumerate(delays.delays))


def arrival_order(delays: DelayTrace, send_interval_ns: int) -> ArrivalPermutation:
    """Sort sender indices by arrival time, ties by ascending index."""
    if len(delays) == 0:
        raise EmptyTrace("empty delay trace")
    if send_interval_ns <= 0:
        raise ValueError("send_interval_ns must be positive")
    times = arrival_times(delays, send_interval_ns)
    order = sorted(range(len(times)), key=lambda i: (times[i], i))
    return ArrivalPermutation(tuple(order))


def reorder_loss(loss: LossTrace, perm: ArrivalPermutation) -> LossTrace:
    """Re-key send-order loss flags by receiver arrival rank."""
    if loss.indexing is not LossIndexing.SEND_ORDER:
        raise WrongIndexing("reorder_loss expects send-order flags")
    if len(loss) != len(perm):
        raise LengthMismatch(f"{len(loss)} flags vs permutation of {len(perm)}")
    flags = tuple(loss.flags[i] for i in perm.order)
    return LossTrace(flags, LossIndexing.ARRIVAL_ORDER)


def reconstruct(
    delays: DelayTrace,
    loss: LossTrace,
    send_interval_ns: int = DEFAULT_SEND_INTERVAL_NS,
) -> RawTrace:
    """Inverse of split_trace: -1 where flagged, the delay otherwise."""
    if loss.indexing is not LossIndexing.SEND_ORDER:
        raise WrongIndexing("reconstruct expects send-order flags")
    if len(delays) != len(loss):
        raise LengthMismatch(f"{len(delays)} delays vs {len(loss)} flags")
    entries = tuple(
        LOSS if f == 1 else d for d, f in zip(delays.delays, loss.flags)
    )
    return RawTrace(entries, send_interval_ns)


def validate(raw: RawTrace) -> TraceDiagnostics:
    """Report entry counts, losses, invalid values, and 32-bit fit."""
    losses = 0
    invalid = 0
    fits = True
    for e in raw.entries:
        if e == LOSS:
            losses += 1
        elif e <= 0:
            invalid += 1
        elif e > U32_MAX:
            fits = False
    return TraceDiagnostics(
        entries=len(raw.entries), losses=losses, invalid=invalid, fits_32bit=fits
    )
