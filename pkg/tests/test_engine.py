"""Replay engine: queue ordering, index wrap law, and the simulate oracle."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from satemu.engine import (
    EventQueue,
    LinkState,
    ScheduledPacket,
    Verdict,
    egress_schedule,
    ingress_decide,
    simulate,
)
from satemu.errors import IndexingMismatch, LengthMismatch, QueueFull
from satemu.trace import (
    DelayTrace,
    LossIndexing,
    LossTrace,
    RawTrace,
    arrival_order,
    reorder_loss,
    split_trace,
)

MS = 1_000_000


def arrival_loss(flags):
    return LossTrace(tuple(flags), LossIndexing.ARRIVAL_ORDER)


def oracle_simulate(delays, arrival_flags, interval):
    """Sort-based reference: rank arrivals, then apply flags by rank."""
    ranked = sorted((i * interval + d, i) for i, d in enumerate(delays))
    out = [0] * len(delays)
    for rank, (t, i) in enumerate(ranked):
        out[i] = -1 if arrival_flags[rank] else t - i * interval
    return out


# -------------------------------------------------------------- EventQueue

def test_queue_orders_by_departure_time():
    q = EventQueue()
    q.push(ScheduledPacket(0, 300))
    q.push(ScheduledPacket(1, 100))
    q.push(ScheduledPacket(2, 200))
    assert [q.pop().send_index for _ in range(3)] == [1, 2, 0]


def test_queue_breaks_departure_ties_by_send_index():
    q = EventQueue()
    q.push(ScheduledPacket(5, 100))
    q.push(ScheduledPacket(2, 100))
    assert q.pop().send_index == 2
    assert q.pop().send_index == 5


def test_queue_peek_does_not_consume():
    q = EventQueue()
    q.push(ScheduledPacket(0, 100))
    assert q.peek().send_index == 0
    assert len(q) == 1


def test_queue_capacity_backpressure():
    q = EventQueue(capacity=1)
    q.push(ScheduledPacket(0, 100))
    with pytest.raises(QueueFull):
        q.push(ScheduledPacket(1, 200))
    assert len(q) == 1


def test_queue_truthiness():
    q = EventQueue()
    assert not q
    q.push(ScheduledPacket(0, 1))
    assert q


# --------------------------------------------------------------- LinkState

def test_link_state_rejects_length_mismatch():
    with pytest.raises(LengthMismatch):
        LinkState(delay_table=(1, 2), loss_table=(0,))


def test_from_traces_requires_arrival_ordered_loss():
    with pytest.raises(IndexingMismatch):
        LinkState.from_traces(DelayTrace((5,)), LossTrace((0,)))


def test_from_traces_accepts_arrival_ordered_loss():
    state = LinkState.from_traces(DelayTrace((5,)), arrival_loss((0,)))
    assert state.trace_len == 1


# ----------------------------------------------------- egress and ingress

def test_egress_stamps_now_plus_table_value():
    state = LinkState(delay_table=(5, 7), loss_table=(0, 0))
    q = EventQueue()
    assert egress_schedule(state, q, now_ns=100) == 105
    assert state.egress_index == 1
    assert egress_schedule(state, q, now_ns=200) == 207


def test_egress_index_wraps_at_trace_len():
    state = LinkState(delay_table=(5, 7), loss_table=(0, 0))
    q = EventQueue()
    egress_schedule(state, q, 0)
    egress_schedule(state, q, 0)
    assert state.egress_index == 0
    assert state.egress_wraps == 1
    # third packet reuses table[0]
    assert egress_schedule(state, q, 1000) == 1005
    assert state.total_scheduled == 3


def test_egress_queue_full_does_not_consume_the_index():
    state = LinkState(delay_table=(5, 7), loss_table=(0, 0))
    q = EventQueue(capacity=1)
    egress_schedule(state, q, 0)
    with pytest.raises(QueueFull):
        egress_schedule(state, q, 0)
    assert state.egress_index == 1
    assert state.total_scheduled == 1


def test_ingress_consumes_rank_on_drop_and_pass():
    state = LinkState(delay_table=(5, 7), loss_table=(1, 0))
    assert ingress_decide(state) is Verdict.DROP
    assert ingress_decide(state) is Verdict.PASS
    assert state.ingress_index == 0
    assert state.ingress_wraps == 1
    assert state.total_arrived == 2
    # wrapped: rank 0's flag applies again
    assert ingress_decide(state) is Verdict.DROP


# ---------------------------------------------------------------- simulate

def test_simulate_reproduces_raw_trace_with_reordering():
    # packet 2 overtakes both predecessors; packet 1 is lost
    raw = RawTrace((50 * MS, -1, 5 * MS), 10 * MS)
    delays, loss_send = split_trace(raw)
    perm = arrival_order(delays, raw.send_interval_ns)
    assert perm.order == (2, 0, 1)
    loss_arr = reorder_loss(loss_send, perm)
    assert loss_arr.flags == (0, 0, 1)
    obs = simulate(delays, loss_arr, raw.send_interval_ns)
    assert obs.entries == raw.entries
    assert obs.delivered == 2
    assert obs.dropped == 1


def test_simulate_no_loss_echoes_delays():
    obs = simulate(DelayTrace((5, 6, 7)), arrival_loss((0, 0, 0)), 10)
    assert obs.entries == (5, 6, 7)


def test_simulate_requires_arrival_ordered_loss():
    with pytest.raises(IndexingMismatch):
        simulate(DelayTrace((5,)), LossTrace((0,)), 10)


def test_simulate_length_mismatch():
    with pytest.raises(LengthMismatch):
        simulate(DelayTrace((5, 6)), arrival_loss((0,)), 10)


def test_simulate_wrap_must_be_explicit():
    with pytest.raises(ValueError):
        simulate(DelayTrace((5,)), arrival_loss((0,)), 10, n_packets=2)


def test_simulate_wrap_reuses_the_table_cyclically():
    obs = simulate(DelayTrace((5, 6)), arrival_loss((0, 0)), 10, n_packets=4, wrap=True)
    assert obs.entries == (5, 6, 5, 6)
    assert obs.egress_wraps == 2


def test_simulate_wrap_applies_loss_flags_cyclically():
    obs = simulate(DelayTrace((5, 6)), arrival_loss((1, 0)), 10, n_packets=4, wrap=True)
    assert obs.entries == (-1, 6, -1, 6)


def test_simulate_partial_replay_consumes_leading_ranks():
    obs = simulate(DelayTrace((5, 6, 7)), arrival_loss((1, 0, 0)), 10, n_packets=2)
    assert obs.entries == (-1, 6)
    assert obs.dropped == 1


def test_simulate_is_deterministic():
    delays = DelayTrace(tuple(random.Random(5).randint(1, 100 * MS) for _ in range(200)))
    flags = arrival_loss(tuple(random.Random(6).randint(0, 1) for _ in range(200)))
    a = simulate(delays, flags, 10 * MS)
    b = simulate(delays, flags, 10 * MS)
    assert a == b


def test_simulate_to_raw_keeps_interval():
    obs = simulate(DelayTrace((5,)), arrival_loss((0,)), 123)
    assert obs.to_raw().send_interval_ns == 123


@settings(deadline=None)
@given(
    st.lists(st.integers(1, 200), min_size=1, max_size=80),
    st.data(),
    st.integers(1, 50),
)
def test_simulate_matches_sort_oracle(delays, data, interval):
    flags = data.draw(
        st.lists(st.integers(0, 1), min_size=len(delays), max_size=len(delays))
    )
    obs = simulate(DelayTrace(tuple(delays)), arrival_loss(flags), interval)
    assert list(obs.entries) == oracle_simulate(delays, flags, interval)


def test_simulate_large_random_pipeline_roundtrip():
    rng = random.Random(99)
    entries = [
        -1 if rng.random() < 0.15 else rng.randint(1, 400 * MS) for _ in range(10_000)
    ]
    entries[0] = 30 * MS  # anchor a delivered head
    raw = RawTrace(tuple(entries))
    delays, loss_send = split_trace(raw)
    loss_arr = reorder_loss(loss_send, arrival_order(delays, raw.send_interval_ns))
    obs = simulate(delays, loss_arr, raw.send_interval_ns)
    assert obs.entries == raw.entries
