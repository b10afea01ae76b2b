"""Deterministic discrete-event execution of per-process state machines.

Simultaneous inputs are resolved by :func:`tie_key`: lower process id
first, then receive < timer expiration < invocation; receives are ordered
by (sender id, sender sequence) and expirations by the order the timers
were set. Handler actions take effect at the real time of the input that
triggered them.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any, Optional

from .model import (DEQ, INVOKE, RECEIVE, RESPOND, SEND, TIMER_EXPIRE, TIMER_SET,
                    EventRecord, MessageRecord, Run, Schedule, SystemParams, Time, as_time)

DEFAULT_EVENT_CAP = 10 ** 6

_RANK = {RECEIVE: 0, TIMER_EXPIRE: 1, INVOKE: 2}


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Send:
    """Send ``payload`` to process ``to``, or to every other process if ``to`` is None."""
    payload: Any
    to: Optional[int] = None


@dataclass(frozen=True)
class SetTimer:
    duration: Time
    payload: Any


@dataclass(frozen=True)
class Respond:
    op: str
    value: Any = None


class ProcessBehavior:
    """Base class for algorithms run by :func:`simulate`.

    Handlers receive the current state and local clock reading and return
    ``(new_state, actions)``. They must not keep state on ``self``.
    """

    name = "behavior"

    def initial_state(self, pid: int, params: SystemParams):
        raise NotImplementedError

    def on_invoke(self, state, op: str, arg, now: Time):
        raise NotImplementedError

    def on_receive(self, state, payload, sender: int, now: Time):
        raise NotImplementedError

    def on_timer(self, state, payload, now: Time):
        raise NotImplementedError


@dataclass(frozen=True)
class SimOutcome:
    run: Run
    quiescence_times: tuple
    final_states: tuple


def tie_key(real_time: Time, process: int, kind: str, a: int, b: int) -> tuple:
    """Total order on pending inputs; ``a``/``b`` are (sender, seq) for
    receives, (timer order, 0) for expirations and (schedule index, 0) for
    invocations."""
    return (real_time, process, _RANK[kind], a, b)


def resolve_ties(pending: list) -> list:
    """Sort ``(real_time, process, kind, a, b)`` tuples into processing order."""
    return sorted(pending, key=lambda e: tie_key(*e[:5]))


def simulate(behavior: ProcessBehavior, schedule: Schedule,
             event_cap: int = DEFAULT_EVENT_CAP) -> SimOutcome:
    params = schedule.params
    n = params.n
    offsets = schedule.clock_offsets
    policy = schedule.delay_policy
    states = [behavior.initial_state(p, params) for p in range(n)]
    events = [[] for _ in range(n)]
    messages = []
    send_seq = [0] * n
    timer_seq = [0] * n
    pending_op = [None] * n

    # chained invocation keyed by the schedule index of its predecessor
    follows = {}
    last_at = {}
    heap = []
    in_flight = 0
    timers = 0
    current = [None] * n

    def push(t, p, kind, a, b, data):
        heapq.heappush(heap, (tie_key(t, p, kind, a, b), kind, data))

    for idx, inv in enumerate(schedule.invocations):
        if inv.time is None:
            follows[last_at[inv.process]] = (idx, inv)
        else:
            push(inv.time, inv.process, INVOKE, idx, 0, (idx, inv))
        last_at[inv.process] = idx

    def record(p, t, kind, **kw):
        events[p].append(EventRecord(p, t, t + offsets[p], kind, **kw))

    def apply(p, t, actions):
        nonlocal in_flight, timers
        for act in actions:
            if isinstance(act, Send):
                targets = [q for q in range(n) if q != p] if act.to is None else [act.to]
                for q in targets:
                    if not 0 <= q < n or q == p:
                        raise SimulationError(f"p{p} sends to invalid process {q}")
                    seq = send_seq[p]
                    send_seq[p] += 1
                    delay = policy.delay(p, q, t)
                    if delay < 0:
                        raise SimulationError(f"negative delay {delay} for p{p}->p{q} at {t}")
                    record(p, t, SEND, payload=act.payload, peer=q, seq=seq)
                    messages.append(MessageRecord(p, q, t, t + delay, act.payload, seq))
                    push(t + delay, q, RECEIVE, p, seq, (p, seq, act.payload))
                    in_flight += 1
            elif isinstance(act, SetTimer):
                dur = as_time(act.duration)
                if dur < 0:
                    raise SimulationError(f"negative timer duration {dur}")
                tid = timer_seq[p]
                timer_seq[p] += 1
                record(p, t, TIMER_SET, payload=act.payload, seq=tid, duration=dur)
                push(t + dur, p, TIMER_EXPIRE, tid, 0, (tid, act.payload))
                timers += 1
            elif isinstance(act, Respond):
                if pending_op[p] != act.op:
                    raise SimulationError(f"p{p} responds to {act.op} with no such pending operation")
                record(p, t, RESPOND, op=act.op, value=act.value)
                pending_op[p] = None
                nxt = follows.pop(current[p], None)
                if nxt is not None:
                    push(t, p, INVOKE, nxt[0], 0, nxt)
            else:
                raise SimulationError(f"unknown action {act!r}")

    quiescence = []
    busy = False
    count = 0
    while heap:
        key, kind, data = heapq.heappop(heap)
        t, p = key[0], key[1]
        count += 1
        if count > event_cap:
            raise SimulationError(f"non-quiescence: more than {event_cap} events processed")
        now = t + offsets[p]
        if kind == INVOKE:
            idx, inv = data
            if pending_op[p] is not None:
                raise SimulationError(
                    f"overlapping invocation: p{p} invokes {inv.op} at {t} "
                    f"while {pending_op[p]} is pending")
            pending_op[p] = inv.op
            current[p] = idx
            record(p, t, INVOKE, op=inv.op, value=inv.arg)
            states[p], acts = behavior.on_invoke(states[p], inv.op, inv.arg, now)
        elif kind == RECEIVE:
            sender, seq, payload = data
            in_flight -= 1
            record(p, t, RECEIVE, payload=payload, peer=sender, seq=seq)
            states[p], acts = behavior.on_receive(states[p], payload, sender, now)
        else:
            tid, payload = data
            timers -= 1
            record(p, t, TIMER_EXPIRE, payload=payload, seq=tid)
            states[p], acts = behavior.on_timer(states[p], payload, now)
        apply(p, t, acts)
        if in_flight or timers:
            busy = True
        elif busy or not quiescence:
            # only count the instant once every event at it has been handled
            if not heap or heap[0][0][0] > t:
                quiescence.append(t)
                busy = False
    if not quiescence:
        quiescence.append(as_time(0))
    if follows:
        idx = min(follows.values())[0]
        raise SimulationError(
            f"chained invocation #{idx} never started: its predecessor did not respond")

    messages.sort(key=lambda m: (m.sender, m.sequence))
    run = Run(params, tuple(tuple(e) for e in events), tuple(offsets), tuple(messages))
    return SimOutcome(run, tuple(quiescence), tuple(states))


def dequeue_latencies(run: Run) -> list:
    """Real-time spans of every completed Dequeue in ``run``."""
    out = []
    for seq in run.events:
        start = None
        for ev in seq:
            if ev.kind == INVOKE and ev.op == DEQ:
                start = ev.real_time
            elif ev.kind == RESPOND and ev.op == DEQ and start is not None:
                out.append(ev.real_time - start)
                start = None
    return out
