#!/usr/bin/env python3
"""Self-contained loopback demo of the real-time relay.

Starts a probe sender and a sink on localhost, pushes a paced datagram
stream through the relay with a synthesized delay/loss table, and
prints the per-packet scheduling error distribution afterwards.
"""

import argparse
import socket
import sys
import threading
import time

from satemu import (
    LossIndexing,
    RelayConfig,
    arrival_order,
    relay_run,
    reorder_loss,
    split_trace,
    synth_trace,
)

MS = 1_000_000


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--packets", type=int, default=300)
    parser.add_argument("--interval-ms", type=float, default=10.0)
    parser.add_argument("--levels-ms", default="5,9")
    parser.add_argument("--period", type=int, default=100)
    parser.add_argument("--loss-rate", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    interval_ns = int(args.interval_ms * MS)
    levels = [int(float(v) * MS) for v in args.levels_ms.split(",")]
    raw = synth_trace(
        length=args.packets,
        period=args.period,
        levels_ns=levels,
        loss_rate=args.loss_rate,
        seed=args.seed,
        send_interval_ns=interval_ns,
    )
    delays, loss_send = split_trace(raw)
    loss = reorder_loss(loss_send, arrival_order(delays, interval_ns))
    assert loss.indexing is LossIndexing.ARRIVAL_ORDER

    sink = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sink.bind(("127.0.0.1", 0))
    sink.settimeout(1.0)
    sink_port = sink.getsockname()[1]

    probe = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    probe.bind(("127.0.0.1", 0))
    listen_port = probe.getsockname()[1]
    probe.close()

    received = []

    def drain():
        try:
            while True:
                payload, _ = sink.recvfrom(65535)
                received.append(payload)
        except (socket.timeout, OSError):
            pass

    def send():
        time.sleep(0.3)
        s = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        for i in range(args.packets):
            s.sendto(i.to_bytes(4, "little"), ("127.0.0.1", listen_port))
            time.sleep(args.interval_ms / 1000)
        s.close()

    threading.Thread(target=drain, daemon=True).start()
    sender = threading.Thread(target=send)
    sender.start()

    print(f"relaying {args.packets} packets at {args.interval_ms} ms "
          f"through 127.0.0.1:{listen_port} -> 127.0.0.1:{sink_port} ...")
    report = relay_run(
        RelayConfig(
            listen=("127.0.0.1", listen_port),
            forward=("127.0.0.1", sink_port),
            delays=delays,
            loss=loss,
            send_interval_ns=interval_ns,
            max_packets=args.packets,
            idle_timeout_ns=5_000_000_000,
        )
    )
    sender.join()
    time.sleep(1.2)  # let the drain thread time out
    sink.close()

    print(f"forwarded {report.forwarded}, dropped {report.dropped} "
          f"(sink saw {len(received)}), queue drops {report.queue_drops}")
    for q in (0.50, 0.90, 0.99, 1.0):
        print(f"  p{int(q * 100):<3} scheduling error "
              f"{report.error_percentile(q) / MS:.3f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
