"""Real-time userspace datagram relay imposing a trace on live traffic.

Every datagram received on the listen endpoint is stamped with
departure_time = receive_time + the next delay-table value; at departure
it passes the arrival-rank loss filter and is either forwarded or
discarded.  Two threads cooperate: the receive thread owns the egress
index and appends to the event queue, the dispatch thread owns the
ingress index and drains it (single-producer/single-consumer).  Intended
departure times are exact by construction; only the actual dispatch
timestamps carry environment jitter, and that error is measured and
reported per packet rather than silently absorbed.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BindFailure, ConfigError, QueueFull
from .engine import EventQueue, LinkState, Verdict, egress_schedule, ingress_decide
from .trace import DEFAULT_SEND_INTERVAL_NS, DelayTrace, LossIndexing, LossTrace, RawTrace

log = logging.getLogger(__name__)

METRICS_HEADER = "index,intended_ns,actual_ns,error_ns,dropped"

# Dispatch sleeps up to this close to a departure, then spins.
_SPIN_WINDOW_NS = 200_000
_POLL_S = 0.05


@dataclass
class RelayConfig:
    listen: tuple[str, int]
    forward: tuple[str, int]
    delays: DelayTrace
    loss: LossTrace
    send_interval_ns: int = DEFAULT_SEND_INTERVAL_NS  # diagnostics only
    capacity: int = 65536
    max_packets: int | None = None
    idle_timeout_ns: int | None = None


@dataclass
class PacketRecord:
    send_index: int
    arrival_rank: int
    receive_ns: int
    intended_ns: int
    actual_ns: int
    error_ns: int
    dropped: bool


@dataclass
class SessionReport:
    records: list[PacketRecord] = field(default_factory=list)
    forwarded: int = 0
    dropped: int = 0
    queue_drops: int = 0
    forward_failures: int = 0
    egress_wraps: int = 0
    ingress_wraps: int = 0
    send_interval_ns: int = DEFAULT_SEND_INTERVAL_NS

    def error_percentile(self, q: float) -> int:
        import math

        errs = sorted(abs(r.error_ns) for r in self.records)
        if not errs:
            return 0
        return errs[max(0, math.ceil(q * len(errs)) - 1)]

    def to_observed(self) -> RawTrace:
        """Per send-index trace of what the relay did: actual delay or loss."""
        by_index = {r.send_index: r for r in self.records}
        entries = []
        for i in range(len(by_index)):
            r = by_index[i]
            entries.append(-1 if r.dropped else r.actual_ns - r.receive_ns)
        return RawTrace(tuple(entries), self.send_interval_ns)

    def write_metrics(self, path: str | Path) -> None:
        lines = [METRICS_HEADER]
        lines.extend(
            f"{r.send_index},{r.intended_ns},{r.actual_ns},{r.error_ns},{int(r.dropped)}"
            for r in self.records
        )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class _Receiver(threading.Thread):
    """Receive loop: schedules departures, owns the egress index."""

    def __init__(self, sock, state, queue, cond, config, report, stop_event):
        super().__init__(daemon=True, name="satemu-relay-rx")
        self.sock = sock
        self.state = state
        self.queue = queue
        self.cond = cond
        self.config = config
        self.report = report
        self.stop_event = stop_event
        self.receive_times: dict[int, int] = {}
        self.done = False
        self.last_activity_ns = time.monotonic_ns()

    def run(self):
        scheduled = 0
        try:
            while not self.stop_event.is_set():
                if (
                    self.config.max_packets is not None
                    and scheduled >= self.config.max_packets
                ):
                    break
                try:
                    payload, _addr = self.sock.recvfrom(65535)
                except socket.timeout:
                    if (
                        self.config.idle_timeout_ns is not None
                        and time.monotonic_ns() - self.last_activity_ns
                        > self.config.idle_timeout_ns
                    ):
                        break
                    continue
                except OSError:
                    break  # socket closed under us during shutdown
                now = time.monotonic_ns()
                self.last_activity_ns = now
                with self.cond:
                    send_index = self.state.total_scheduled
                    try:
                        egress_schedule(
                            self.state,
                            self.queue,
                            now,
                            payload_ref=payload,
                            size=len(payload),
                        )
                    except QueueFull:
                        self.report.queue_drops += 1
                        continue
                    self.receive_times[send_index] = now
                    scheduled += 1
                    self.cond.notify()
        finally:
            with self.cond:
                self.done = True
                self.cond.notify()


def relay_run(config: RelayConfig, stop_event: threading.Event | None = None) -> SessionReport:
    """Run one relay session to completion and return its report.

    The session ends when max_packets have been scheduled and drained,
    the idle timeout expires, or stop_event is set.
    """
    if len(config.delays) == 0:
        raise ConfigError("delay table is empty")
    if config.loss.indexing is not LossIndexing.ARRIVAL_ORDER:
        raise ConfigError("relay needs an arrival-ordered loss table")
    state = LinkState.from_traces(config.delays, config.loss)

    stop_event = stop_event or threading.Event()
    report = SessionReport(send_interval_ns=config.send_interval_ns)
    queue = EventQueue(capacity=config.capacity)
    cond = threading.Condition()

    try:
        rx_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        rx_sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        rx_sock.bind(config.listen)
    except OSError as e:
        raise BindFailure(f"cannot bind {config.listen}: {e}") from e
    rx_sock.settimeout(_POLL_S)
    tx_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    receiver = _Receiver(rx_sock, state, queue, cond, config, report, stop_event)
    receiver.start()

    try:
        while True:
            with cond:
                while True:
                    if queue:
                        departure = queue.peek().departure_ns
                        wait_ns = departure - time.monotonic_ns()
                        if wait_ns <= _SPIN_WINDOW_NS:
                            pkt = queue.pop()
                            break
                        # Aim the wakeup at the start of the spin window, not
                        # at the departure itself, so scheduler oversleep is
                        # absorbed by the spin instead of becoming lateness.
                        cond.wait(min((wait_ns - _SPIN_WINDOW_NS) / 1e9, _POLL_S))
                    elif receiver.done or stop_event.is_set():
                        pkt = None
                        break
                    else:
                        cond.wait(_POLL_S)
            if pkt is None:
                break

            while time.monotonic_ns() < pkt.departure_ns:
                pass  # final approach: spin for sub-scheduler precision

            verdict = ingress_decide(state)
            actual = time.monotonic_ns()
            dropped = verdict is Verdict.DROP
            if not dropped:
                try:
                    tx_sock.sendto(pkt.payload_ref, config.forward)
                    report.forwarded += 1
                except OSError as e:
                    report.forward_failures += 1
                    log.warning("forward to %s failed: %s", config.forward, e)
            else:
                report.dropped += 1
            report.records.append(
                PacketRecord(
                    send_index=pkt.send_index,
                    arrival_rank=len(report.records),
                    receive_ns=receiver.receive_times[pkt.send_index],
                    intended_ns=pkt.departure_ns,
                    actual_ns=actual,
                    error_ns=actual - pkt.departure_ns,
                    dropped=dropped,
                )
            )
    finally:
        stop_event.set()
        rx_sock.close()
        receiver.join(timeout=2.0)
        tx_sock.close()

    report.egress_wraps = state.egress_wraps
    report.ingress_wraps = state.ingress_wraps
    return report
