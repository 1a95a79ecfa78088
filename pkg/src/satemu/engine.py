"""Earliest-departure-time replay engine.

The sender side stamps each packet with departure_time = now + the next
delay-table value and hands it to a priority queue ordered by
(departure_time, send_index); the receiver side consumes arrival ranks
from the loss table and drops flagged arrivals.  ``simulate`` runs both
sides on a virtual clock and is fully deterministic, which makes it the
executable oracle for the kernel data-plane programs that use the same
indexing law (the k-th matched packet uses table[k mod trace_len]).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .errors import IndexingMismatch, LengthMismatch, QueueFull
from .trace import DelayTrace, LossIndexing, LossTrace, RawTrace


class Verdict(Enum):
    PASS = "pass"
    DROP = "drop"


@dataclass
class ScheduledPacket:
    send_index: int
    departure_ns: int
    payload_ref: Any = None
    size: int = 0


class EventQueue:
    """Priority queue keyed by (departure_ns, send_index).

    An exact queue rather than a bucketed timing wheel: replay
    verification needs exact dequeue order, and bucketing would add
    artificial quantization.
    """

    def __init__(self, capacity: int | None = None):
        self._heap: list[tuple[int, int, ScheduledPacket]] = []
        self.capacity = capacity

    def push(self, pkt: ScheduledPacket) -> None:
        if self.capacity is not None and len(self._heap) >= self.capacity:
            raise QueueFull(f"event queue at capacity {self.capacity}")
        heapq.heappush(self._heap, (pkt.departure_ns, pkt.send_index, pkt))

    def pop(self) -> ScheduledPacket:
        return heapq.heappop(self._heap)[2]

    def peek(self) -> ScheduledPacket:
        return self._heap[0][2]

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)


@dataclass
class LinkState:
    """Shared replay state: the loaded tables and two wrapping counters.

    egress_index is owned by whoever schedules departures; ingress_index
    by whoever admits arrivals.  Both wrap to 0 at trace_len, mirroring
    the kernel programs; wraps are counted so cyclic replay is visible
    in reports.  ingress_index counts every arrival, dropped or not.
    """

    delay_table: tuple[int, ...]
    loss_table: tuple[int, ...]
    trace_len: int = 0
    egress_index: int = 0
    ingress_index: int = 0
    egress_wraps: int = 0
    ingress_wraps: int = 0

    def __post_init__(self):
        self.delay_table = tuple(self.delay_table)
        self.loss_table = tuple(self.loss_table)
        if len(self.delay_table) != len(self.loss_table):
            raise LengthMismatch(
                f"{len(self.delay_table)} delays vs {len(self.loss_table)} loss flags"
            )
        if not self.trace_len:
            self.trace_len = len(self.delay_table)

    @classmethod
    def from_traces(cls, delays: DelayTrace, loss: LossTrace) -> LinkState:
        if loss.indexing is not LossIndexing.ARRIVAL_ORDER:
            raise IndexingMismatch("loss table must be arrival-ordered")
        return cls(delay_table=delays.delays, loss_table=loss.flags)

    @property
    def total_scheduled(self) -> int:
        return self.egress_wraps * self.trace_len + self.egress_index

    @property
    def total_arrived(self) -> int:
        return self.ingress_wraps * self.trace_len + self.ingress_index


def egress_schedule(
    state: LinkState,
    queue: EventQueue,
    now_ns: int,
    payload_ref: Any = None,
    size: int = 0,
) -> int:
    """Stamp the next departure time and enqueue the packet.

    Returns the departure time; raises QueueFull as back-pressure when
    the queue is at capacity (the index is not consumed in that case).
    """
    send_index = state.total_scheduled
    departure = now_ns + state.delay_table[state.egress_index]
    queue.push(
        ScheduledPacket(
            send_index=send_index,
            departure_ns=departure,
            payload_ref=payload_ref,
            size=size,
        )
    )
    state.egress_index += 1
    if state.egress_index >= state.trace_len:
        state.egress_index = 0
        state.egress_wraps += 1
    return departure


def ingress_decide(state: LinkState) -> Verdict:
    """Admit or drop the next arrival; a drop still consumes the rank."""
    flag = state.loss_table[state.ingress_index]
    state.ingress_index += 1
    if state.ingress_index >= state.trace_len:
        state.ingress_index = 0
        state.ingress_wraps += 1
    return Verdict.DROP if flag == 1 else Verdict.PASS


@dataclass(frozen=True)
class ObservedTrace:
    """What the receiver saw, keyed by send index; -1 marks a drop."""

    entries: tuple[int, ...]
    send_interval_ns: int
    delivered: int
    dropped: int
    egress_wraps: int = 0

    def to_raw(self) -> RawTrace:
        return RawTrace(self.entries, self.send_interval_ns)


def simulate(
    delays: DelayTrace,
    loss: LossTrace,
    send_interval_ns: int,
    n_packets: int | None = None,
    wrap: bool = False,
) -> ObservedTrace:
    """Replay the trace pair over a virtual-clock link.

    Packet i is injected at i * interval, EDT-scheduled, delivered in
    (departure_time, send_index) order, and filtered by the arrival-rank
    loss table at delivery.  Replaying more packets than the trace holds
    requires wrap=True; silent wrap would corrupt offline comparisons.
    """
    if loss.indexing is not LossIndexing.ARRIVAL_ORDER:
        raise IndexingMismatch("simulate expects arrival-ordered loss flags")
    if len(delays) != len(loss):
        raise LengthMismatch(f"{len(delays)} delays vs {len(loss)} flags")
    n = len(delays) if n_packets is None else n_packets
    if n > len(delays) and not wrap:
        raise ValueError("n_packets exceeds trace length; pass wrap=True for cyclic replay")

    state = LinkState(delay_table=delays.delays, loss_table=loss.flags)
    queue = EventQueue()
    observed: list[int] = [0] * n
    delivered = 0
    dropped = 0

    next_inject = 0
    while next_inject < n or queue:
        inject_time = next_inject * send_interval_ns
        if next_inject < n and (not queue or inject_time <= queue.peek().departure_ns):
            egress_schedule(state, queue, inject_time, payload_ref=next_inject)
            next_inject += 1
            continue
        pkt = queue.pop()
        i = pkt.payload_ref
        if ingress_decide(state) is Verdict.DROP:
            observed[i] = -1
            dropped += 1
        else:
            observed[i] = pkt.departure_ns - i * send_interval_ns
            delivered += 1

    return ObservedTrace(
        entries=tuple(observed),
        send_interval_ns=send_interval_ns,
        delivered=delivered,
        dropped=dropped,
        egress_wraps=state.egress_wraps,
    )
