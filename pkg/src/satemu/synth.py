"""Synthetic trace generation for tests and demos.

Produces traces with the gross shape of a LEO access link: the delay
floor steps between configured levels at a fixed period (the handover
signature), with bounded positive jitter on top and Bernoulli losses.
Deterministic for a fixed seed.
"""

from __future__ import annotations

import random

from .errors import InvalidParams
from .trace import DEFAULT_SEND_INTERVAL_NS, LOSS, RawTrace


def synth_trace(
    length: int,
    period: int,
    levels_ns: list[int] | tuple[int, ...],
    jitter_ns: int = 0,
    loss_rate: float = 0.0,
    seed: int = 0,
    send_interval_ns: int = DEFAULT_SEND_INTERVAL_NS,
) -> RawTrace:
    if length < 1:
        raise InvalidParams("length must be >= 1")
    if period < 1:
        raise InvalidParams("period must be >= 1")
    if not levels_ns or any(v <= 0 for v in levels_ns):
        raise InvalidParams("levels must be non-empty and positive")
    if not 0.0 <= loss_rate < 1.0:
        raise InvalidParams("loss_rate must be in [0, 1)")
    if jitter_ns < 0:
        raise InvalidParams("jitter_ns must be >= 0")

    rng = random.Random(seed)
    lost = [rng.random() < loss_rate for _ in range(length)]
    if all(lost):
        lost[0] = False  # a trace needs at least one delivered packet

    delays = []
    for i in range(length):
        base = levels_ns[(i // period) % len(levels_ns)]
        jitter = rng.randrange(jitter_ns + 1) if jitter_ns else 0
        delays.append(base + jitter)

    # Pin each segment's floor to its base exactly: zero the jitter on
    # the first delivered packet of every segment.
    for seg_start in range(0, length, period):
        for i in range(seg_start, min(seg_start + period, length)):
            if not lost[i]:
                delays[i] = levels_ns[(i // period) % len(levels_ns)]
                break

    entries = tuple(LOSS if lost[i] else delays[i] for i in range(length))
    return RawTrace(entries, send_interval_ns)
