"""Kernel deployment artifacts: map payloads and attach/teardown scripts.

Everything here is byte-exact generation.  Map keys and values are
rendered as four space-separated decimal bytes in little-endian order,
the form the bpftool command line accepts, fixed to one rendering so
golden tests stay stable.  Nothing in this module executes privileged
commands; it writes the scripts that do.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyImage, InvalidRole, ValueOverflow, WrongIndexing
from .trace import U32_MAX, DelayTrace, LossIndexing, LossTrace

DELAY_MAP_NAME = "delay_map"
LOSS_MAP_NAME = "loss_map"


class Role(Enum):
    SENDER = "sender"
    RECEIVER = "receiver"


def encode_u32_le(value: int) -> str:
    """32-bit value as four space-separated decimal bytes, little-endian."""
    if not 0 <= value <= U32_MAX:
        raise ValueOverflow(f"{value} does not fit in 32 bits")
    return " ".join(str(b) for b in struct.pack("<I", value))


def decode_u32_le(rendered: str) -> int:
    data = bytes(int(tok) for tok in rendered.split())
    if len(data) != 4:
        raise ValueError(f"expected 4 bytes, got {len(data)}")
    return struct.unpack("<I", data)[0]


@dataclass(frozen=True)
class MapImage:
    """Encoded array-map payload: contiguous keys 0..trace_len-1."""

    name: str
    entries: tuple[tuple[str, str], ...]  # (key bytes, value bytes)
    trace_len: int


def encode_map_entries(values: list[int] | tuple[int, ...], name: str) -> MapImage:
    entries = tuple(
        (encode_u32_le(key), encode_u32_le(value)) for key, value in enumerate(values)
    )
    return MapImage(name=name, entries=entries, trace_len=len(entries))


def delay_map_image(delays: DelayTrace, name: str = DELAY_MAP_NAME) -> MapImage:
    return encode_map_entries(delays.delays, name)


def loss_map_image(loss: LossTrace, name: str = LOSS_MAP_NAME) -> MapImage:
    if loss.indexing is not LossIndexing.ARRIVAL_ORDER:
        raise WrongIndexing("loss map must be built from arrival-ordered flags")
    return encode_map_entries(loss.flags, name)


@dataclass(frozen=True)
class MapScript:
    script: str
    batch_body: str | None = None


def map_update_lines(image: MapImage, id_expr: str) -> list[str]:
    return [
        f"sudo bpftool map update id {id_expr} key {k} value {v}"
        for k, v in image.entries
    ]


def emit_map_commands(
    image: MapImage,
    target: int | str | None = None,
    batch: bool = False,
    batch_file: str | None = None,
) -> MapScript:
    """Script that populates one map, one update command per entry.

    An integer target uses that map id directly; a string (or None,
    which falls back to the image's map name) emits a name-to-id lookup
    first.  With batch=True a single batch-file invocation replaces the
    per-entry commands; per-entry process spawns are impractical at
    multi-million-entry trace lengths.
    """
    if not image.entries:
        raise EmptyImage(f"map image {image.name!r} has no entries")
    lines = ["#!/bin/sh", "set -e"]

    if batch:
        # Batch files are literal (no shell expansion), so name targets
        # address the map by name instead of resolving an id first.
        batch_file = batch_file or f"{image.name}.batch"
        if isinstance(target, int):
            spec = f"id {target}"
        else:
            spec = f"name {target or image.name}"
        body = (
            "\n".join(
                f"map update {spec} key {k} value {v}" for k, v in image.entries
            )
            + "\n"
        )
        lines.append(f"sudo bpftool batch file {batch_file}")
        return MapScript(script="\n".join(lines) + "\n", batch_body=body)

    if isinstance(target, int):
        id_expr = str(target)
    else:
        name = target or image.name
        lines.append(
            f"MAP_ID=$(sudo bpftool map show name {name} | head -n1 | cut -d: -f1)"
        )
        id_expr = "${MAP_ID}"
    lines.extend(map_update_lines(image, id_expr))
    return MapScript(script="\n".join(lines) + "\n")


@dataclass(frozen=True)
class DeployScript:
    lines: tuple[str, ...]
    role: Role
    device: str

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _object_source(object_file: str) -> str:
    return object_file[:-2] + ".c" if object_file.endswith(".o") else object_file + ".c"


def emit_deploy_script(
    role: Role, device: str, object_file: str, section: str
) -> DeployScript:
    """Attach script for one side of the emulated link.

    The sender installs a dummy clsact qdisc, attaches the delay program
    as a direct-action egress filter, and installs fq as the root qdisc
    so the stamped departure times take effect.  The receiver attaches
    the drop program at the generic XDP hook.
    """
    compile_line = (
        f"# clang -O2 -g -target bpf -c {_object_source(object_file)} -o {object_file}"
    )
    if role is Role.SENDER:
        lines = (
            "#!/bin/sh",
            compile_line,
            f"sudo tc qdisc add dev {device} clsact",
            f"sudo tc filter add dev {device} egress bpf direct-action obj {object_file} sec {section}",
            f"sudo tc qdisc add dev {device} root fq",
        )
    elif role is Role.RECEIVER:
        lines = (
            "#!/bin/sh",
            compile_line,
            f"sudo ip link set dev {device} xdpgeneric obj {object_file} sec {section}",
        )
    else:
        raise InvalidRole(f"unknown role {role!r}")
    return DeployScript(lines=lines, role=role, device=device)


def emit_teardown_script(role: Role, device: str) -> DeployScript:
    if role is Role.SENDER:
        lines = (
            "#!/bin/sh",
            f"sudo tc qdisc del dev {device} root fq 2>/dev/null || true",
            f"sudo tc qdisc del dev {device} clsact 2>/dev/null || true",
        )
    elif role is Role.RECEIVER:
        lines = (
            "#!/bin/sh",
            f"sudo ip link set dev {device} xdpgeneric off",
        )
    else:
        raise InvalidRole(f"unknown role {role!r}")
    return DeployScript(lines=lines, role=role, device=device)
