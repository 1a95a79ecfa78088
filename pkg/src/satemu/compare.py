"""Trace comparison for replay verification."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import LengthMismatch
from .trace import LOSS, RawTrace

# Default verification bound: emulated delay observed to sit within 2 ms
# of the original on a quiet host.
DEFAULT_TOLERANCE_NS = 2_000_000


@dataclass(frozen=True)
class ComparisonReport:
    n_compared: int
    errors: tuple[tuple[int, int], ...]  # (index, observed - original) ns
    max_abs_error_ns: int
    p50_abs_error_ns: int
    p99_abs_error_ns: int
    loss_mismatch_indices: tuple[int, ...]
    tolerance_ns: int
    truncated: int = 0

    @property
    def loss_mismatches(self) -> int:
        return len(self.loss_mismatch_indices)

    @property
    def verdict(self) -> bool:
        return self.max_abs_error_ns <= self.tolerance_ns and not self.loss_mismatch_indices


def compare(
    original: RawTrace,
    observed: RawTrace,
    tolerance_ns: int = DEFAULT_TOLERANCE_NS,
    allow_truncate: bool = False,
) -> ComparisonReport:
    """Per-index delay errors and loss-position agreement.

    Errors are observed - original over indices where both sides
    delivered; an index where exactly one side lost the packet is a loss
    mismatch.  The verdict passes iff max |error| <= tolerance and there
    are no loss mismatches.
    """
    if len(original) != len(observed) and not allow_truncate:
        raise LengthMismatch(
            f"{len(original)} vs {len(observed)} entries (pass allow_truncate to compare the overlap)"
        )
    n = min(len(original), len(observed))
    truncated = max(len(original), len(observed)) - n

    errors = []
    mismatches = []
    for i in range(n):
        a, b = original.entries[i], observed.entries[i]
        if a == LOSS and b == LOSS:
            continue
        if a == LOSS or b == LOSS:
            mismatches.append(i)
            continue
        errors.append((i, b - a))

    abs_sorted = sorted(abs(e) for _, e in errors)
    if abs_sorted:
        max_abs = abs_sorted[-1]
        p50 = abs_sorted[max(0, math.ceil(0.50 * len(abs_sorted)) - 1)]
        p99 = abs_sorted[max(0, math.ceil(0.99 * len(abs_sorted)) - 1)]
    else:
        max_abs = p50 = p99 = 0

    return ComparisonReport(
        n_compared=n,
        errors=tuple(errors),
        max_abs_error_ns=max_abs,
        p50_abs_error_ns=p50,
        p99_abs_error_ns=p99,
        loss_mismatch_indices=tuple(mismatches),
        tolerance_ns=tolerance_ns,
        truncated=truncated,
    )
