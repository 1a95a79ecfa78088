"""Trace-driven network link emulation.

Replays a measured per-packet delay/loss trace over live traffic, either
in-process on a virtual clock, through a real-time UDP relay, or by
emitting the kernel map payloads and attach scripts that drive an
in-kernel packet scheduler.
"""

from .compare import DEFAULT_TOLERANCE_NS, ComparisonReport, compare
from .engine import (
    EventQueue,
    LinkState,
    ObservedTrace,
    ScheduledPacket,
    Verdict,
    egress_schedule,
    ingress_decide,
    simulate,
)
from .errors import (
    AllLost,
    BindFailure,
    ConfigError,
    EmptyImage,
    EmptyTrace,
    ForwardFailure,
    IndexingMismatch,
    InvalidEntry,
    InvalidParams,
    InvalidRole,
    LengthMismatch,
    MalformedDocument,
    NoRecords,
    ParseError,
    QueueFull,
    SatemuError,
    ValueOverflow,
    WrongIndexing,
)
from .ingest import (
    IngestDiagnostics,
    TraceStats,
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
from .kernel import (
    DeployScript,
    MapImage,
    MapScript,
    Role,
    decode_u32_le,
    delay_map_image,
    emit_deploy_script,
    emit_map_commands,
    emit_teardown_script,
    encode_map_entries,
    encode_u32_le,
    loss_map_image,
    map_update_lines,
)
from .relay import PacketRecord, RelayConfig, SessionReport, relay_run
from .synth import synth_trace
from .trace import (
    DEFAULT_SEND_INTERVAL_NS,
    LOSS,
    U32_MAX,
    ArrivalPermutation,
    DelayTrace,
    LossIndexing,
    LossTrace,
    RawTrace,
    TraceDiagnostics,
    arrival_order,
    arrival_times,
    reconstruct,
    reorder_loss,
    split_trace,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalPermutation",
    "ComparisonReport",
    "DEFAULT_SEND_INTERVAL_NS",
    "DEFAULT_TOLERANCE_NS",
    "DelayTrace",
    "DeployScript",
    "EventQueue",
    "IngestDiagnostics",
    "LOSS",
    "LinkState",
    "LossIndexing",
    "LossTrace",
    "MapImage",
    "MapScript",
    "ObservedTrace",
    "PacketRecord",
    "RawTrace",
    "RelayConfig",
    "Role",
    "SatemuError",
    "ScheduledPacket",
    "SessionReport",
    "TraceDiagnostics",
    "TraceStats",
    "U32_MAX",
    "Verdict",
    "arrival_order",
    "arrival_times",
    "compare",
    "decode_u32_le",
    "delay_map_image",
    "egress_schedule",
    "emit_deploy_script",
    "emit_map_commands",
    "emit_teardown_script",
    "encode_map_entries",
    "encode_u32_le",
    "ingress_decide",
    "loss_map_image",
    "map_update_lines",
    "parse_irtt",
    "parse_irtt_detailed",
    "read_canonical",
    "read_delay",
    "read_loss",
    "reconstruct",
    "relay_run",
    "reorder_loss",
    "simulate",
    "split_trace",
    "synth_trace",
    "trace_stats",
    "validate",
    "write_canonical",
    "write_delay",
    "write_loss",
]
