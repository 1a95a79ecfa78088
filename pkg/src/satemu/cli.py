"""satemu command-line entry point.

Each subcommand is a thin composition of the library operations:
ingest -> split -> (simulate | relay | maps/deploy) -> compare/stats,
plus a synthetic trace generator.  Exit status is 0 on success and
nonzero with a diagnostic on any toolkit error; compare additionally
exits 1 when the verdict fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import ingest, kernel
from .compare import DEFAULT_TOLERANCE_NS, compare
from .engine import simulate
from .errors import SatemuError
from .relay import RelayConfig, relay_run
from .synth import synth_trace
from .trace import (
    DEFAULT_SEND_INTERVAL_NS,
    LossIndexing,
    arrival_order,
    reorder_loss,
    split_trace,
    validate,
)

MS = 1_000_000


def _addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected host:port, got {text!r}")
    return host, int(port)


def _write_executable(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    path.chmod(path.stat().st_mode | 0o111)


def cmd_ingest(args) -> int:
    document = Path(args.irtt).read_text(encoding="utf-8")
    raw, diag = ingest.parse_irtt_detailed(document, args.interval_ns)
    ingest.write_canonical(raw, args.out)
    d = validate(raw)
    print(
        f"{args.out}: {d.entries} entries, {d.losses} losses "
        f"({diag.gap_losses} from sequence gaps, {diag.duplicates} duplicates dropped), "
        f"interval {raw.send_interval_ns} ns, fits 32-bit: {d.fits_32bit}"
    )
    if diag.loss_markers:
        print(f"loss markers seen: {dict(diag.loss_markers)}")
    return 0


def cmd_split(args) -> int:
    raw = ingest.read_canonical(args.infile, args.interval_ns)
    delays, loss_send = split_trace(raw)
    perm = arrival_order(delays, args.interval_ns)
    loss_arrival = reorder_loss(loss_send, perm)
    ingest.write_delay(delays, args.delay)
    ingest.write_loss(loss_send, args.loss_send)
    ingest.write_loss(loss_arrival, args.loss_arrival)
    print(
        f"split {len(raw)} entries: {loss_send.loss_count} losses; "
        f"wrote {args.delay}, {args.loss_send}, {args.loss_arrival}"
    )
    return 0


def cmd_maps(args) -> int:
    delays = ingest.read_delay(args.delay)
    loss = ingest.read_loss(args.loss_arrival, LossIndexing.ARRIVAL_ORDER)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for image, target in (
        (kernel.delay_map_image(delays), args.delay_map_id),
        (kernel.loss_map_image(loss), args.loss_map_id),
    ):
        batch_file = f"{image.name}.batch"
        script = kernel.emit_map_commands(
            image, target=target, batch=args.batch, batch_file=batch_file
        )
        if script.batch_body is not None:
            (out_dir / batch_file).write_text(script.batch_body, encoding="utf-8")
        _write_executable(out_dir / f"{image.name}_update.sh", script.script)
        print(f"{image.name}: {image.trace_len} entries -> {out_dir}")
    return 0


def cmd_deploy(args) -> int:
    role = kernel.Role(args.role)
    script = kernel.emit_deploy_script(role, args.device, args.obj, args.sec)
    _write_executable(Path(args.out), script.text)
    print(f"wrote {args.out} ({role.value}, dev {args.device})")
    if args.teardown_out:
        teardown = kernel.emit_teardown_script(role, args.device)
        _write_executable(Path(args.teardown_out), teardown.text)
        print(f"wrote {args.teardown_out}")
    return 0


def cmd_simulate(args) -> int:
    delays = ingest.read_delay(args.delay)
    loss = ingest.read_loss(args.loss_arrival, LossIndexing.ARRIVAL_ORDER)
    observed = simulate(
        delays,
        loss,
        args.interval_ns,
        n_packets=args.n_packets,
        wrap=args.wrap,
    )
    ingest.write_canonical(observed.to_raw(), args.out)
    print(
        f"simulated {len(observed.entries)} packets: {observed.delivered} delivered, "
        f"{observed.dropped} dropped, {observed.egress_wraps} trace wraps -> {args.out}"
    )
    return 0


def cmd_relay(args) -> int:
    delays = ingest.read_delay(args.delay)
    loss = ingest.read_loss(args.loss_arrival, LossIndexing.ARRIVAL_ORDER)
    config = RelayConfig(
        listen=args.listen,
        forward=args.forward,
        delays=delays,
        loss=loss,
        send_interval_ns=args.interval_ns,
        capacity=args.capacity,
        max_packets=args.max_packets,
        idle_timeout_ns=args.idle_timeout_ns,
    )
    report = relay_run(config)
    report.write_metrics(args.report)
    if args.observed:
        ingest.write_canonical(report.to_observed(), args.observed)
    print(
        f"relayed {len(report.records)} packets: {report.forwarded} forwarded, "
        f"{report.dropped} dropped, p99 scheduling error "
        f"{report.error_percentile(0.99) / MS:.3f} ms -> {args.report}"
    )
    return 0


def cmd_compare(args) -> int:
    a = ingest.read_canonical(args.a)
    b = ingest.read_canonical(args.b)
    report = compare(a, b, args.tolerance_ns, allow_truncate=args.truncate)
    payload = {
        "n_compared": report.n_compared,
        "max_abs_error_ns": report.max_abs_error_ns,
        "p50_abs_error_ns": report.p50_abs_error_ns,
        "p99_abs_error_ns": report.p99_abs_error_ns,
        "loss_mismatches": report.loss_mismatches,
        "loss_mismatch_indices": list(report.loss_mismatch_indices[:1000]),
        "tolerance_ns": report.tolerance_ns,
        "truncated": report.truncated,
        "verdict": "pass" if report.verdict else "fail",
    }
    Path(args.report).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.errors_out:
        lines = ["index,error_ns"]
        lines.extend(f"{i},{e}" for i, e in report.errors)
        Path(args.errors_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(
        f"compared {report.n_compared}: max |error| {report.max_abs_error_ns} ns, "
        f"{report.loss_mismatches} loss mismatches -> "
        f"{'PASS' if report.verdict else 'FAIL'}"
    )
    return 0 if report.verdict else 1


def cmd_stats(args) -> int:
    raw = ingest.read_canonical(args.infile)
    stats = ingest.trace_stats(raw, args.window, args.threshold_ns)
    payload = dataclasses.asdict(stats)
    payload["windowed_min_series"] = [list(p) for p in stats.windowed_min_series]
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.min_series:
        lines = ["index,value"]
        lines.extend(f"{start},{mn}" for start, mn in stats.windowed_min_series)
        Path(args.min_series).write_text("\n".join(lines) + "\n", encoding="utf-8")
    period = stats.estimated_period if stats.estimated_period is not None else "n/a"
    print(
        f"{stats.count} entries, loss rate {stats.loss_rate:.4f}, "
        f"estimated period {period} samples -> {args.out}"
    )
    return 0


def cmd_synth(args) -> int:
    levels_ns = [int(float(v) * MS) for v in args.levels.split(",") if v]
    raw = synth_trace(
        length=args.length,
        period=args.period,
        levels_ns=levels_ns,
        jitter_ns=args.jitter_ns,
        loss_rate=args.loss_rate,
        seed=args.seed,
        send_interval_ns=args.interval_ns,
    )
    ingest.write_canonical(raw, args.out)
    d = validate(raw)
    print(f"synthesized {d.entries} entries ({d.losses} losses) -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satemu",
        description="Trace-driven satellite link emulation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a measurement JSON document to a canonical trace")
    p.add_argument("--irtt", required=True, help="measurement JSON file")
    p.add_argument("--interval-ns", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="split a trace into delay and loss tables")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--interval-ns", type=int, default=DEFAULT_SEND_INTERVAL_NS)
    p.add_argument("--delay", required=True)
    p.add_argument("--loss-send", required=True)
    p.add_argument("--loss-arrival", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("maps", help="emit kernel map population scripts")
    p.add_argument("--delay", required=True)
    p.add_argument("--loss-arrival", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--batch", action="store_true")
    p.add_argument("--delay-map-id", type=int, default=None)
    p.add_argument("--loss-map-id", type=int, default=None)
    p.set_defaults(func=cmd_maps)

    p = sub.add_parser("deploy", help="emit attach scripts for one side of the link")
    p.add_argument("--role", required=True, choices=[r.value for r in kernel.Role])
    p.add_argument("--device", required=True)
    p.add_argument("--obj", required=True)
    p.add_argument("--sec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--teardown-out", default=None)
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("simulate", help="replay the trace on a virtual clock")
    p.add_argument("--delay", required=True)
    p.add_argument("--loss-arrival", required=True)
    p.add_argument("--interval-ns", type=int, default=DEFAULT_SEND_INTERVAL_NS)
    p.add_argument("--n-packets", type=int, default=None)
    p.add_argument("--wrap", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("relay", help="impose the trace on live datagrams")
    p.add_argument("--listen", type=_addr, required=True)
    p.add_argument("--forward", type=_addr, required=True)
    p.add_argument("--delay", required=True)
    p.add_argument("--loss-arrival", required=True)
    p.add_argument("--interval-ns", type=int, default=DEFAULT_SEND_INTERVAL_NS)
    p.add_argument("--report", required=True)
    p.add_argument("--observed", default=None)
    p.add_argument("--max-packets", type=int, default=None)
    p.add_argument("--idle-timeout-ns", type=int, default=5_000_000_000)
    p.add_argument("--capacity", type=int, default=65536)
    p.set_defaults(func=cmd_relay)

    p = sub.add_parser("compare", help="compare two canonical traces")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--tolerance-ns", type=int, default=DEFAULT_TOLERANCE_NS)
    p.add_argument("--truncate", action="store_true")
    p.add_argument("--report", required=True)
    p.add_argument("--errors-out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stats", help="descriptive statistics and periodicity estimate")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--threshold-ns", type=int, default=ingest.DEFAULT_CHANGE_THRESHOLD_NS)
    p.add_argument("--out", required=True)
    p.add_argument("--min-series", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic stepped-floor trace")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--levels", required=True, help="comma-separated delay floors in ms")
    p.add_argument("--jitter-ns", type=int, default=0)
    p.add_argument("--loss-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interval-ns", type=int, default=DEFAULT_SEND_INTERVAL_NS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SatemuError as e:
        print(f"satemu {args.command}: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"satemu {args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
