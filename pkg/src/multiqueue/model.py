"""Domain vocabulary: exact time, system parameters, runs, schedules, histories.

All times are :class:`fractions.Fraction` values. Nothing in this package
ever converts a time to floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

Time = Fraction

ENQ = "enqueue"
DEQ = "dequeue"
OPS = (ENQ, DEQ)

# event kinds
INVOKE = "invoke"
RESPOND = "respond"
SEND = "send"
RECEIVE = "receive"
TIMER_SET = "timer_set"
TIMER_EXPIRE = "timer_expire"
EVENT_KINDS = (INVOKE, RESPOND, SEND, RECEIVE, TIMER_SET, TIMER_EXPIRE)
INPUT_KINDS = (INVOKE, RECEIVE, TIMER_EXPIRE)


class ModelError(ValueError):
    """Raised when a model object would violate its invariants."""


class _Bottom:
    """The empty-queue return value. Never equal to any enqueue argument."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


def as_time(value: Any) -> Time:
    """Coerce ints, Fractions and ``"p/q"`` strings to an exact time.

    Floats are refused; they would smuggle rounding into the model.
    """
    if isinstance(value, bool):
        raise ModelError(f"not a time: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"not a rational: {value!r}") from exc
    if isinstance(value, dict) and set(value) == {"num", "den"}:
        return Fraction(int(value["num"]), int(value["den"]))
    raise ModelError(f"not a time: {value!r}")


@dataclass(frozen=True)
class SystemParams:
    n: int
    d: Time
    u: Time

    def __post_init__(self):
        object.__setattr__(self, "d", as_time(self.d))
        object.__setattr__(self, "u", as_time(self.u))
        if not isinstance(self.n, int) or self.n < 2:
            raise ModelError(f"n must be an integer >= 2, got {self.n!r}")
        if self.d <= 0:
            raise ModelError(f"d must be positive, got {self.d}")
        if not 0 <= self.u <= self.d:
            raise ModelError(f"u must satisfy 0 <= u <= d, got u={self.u}, d={self.d}")

    @property
    def min_delay(self) -> Time:
        return self.d - self.u

    @property
    def epsilon(self) -> Time:
        return epsilon(self)


def epsilon(params: SystemParams) -> Time:
    """Largest admissible clock skew, (1 - 1/n) u."""
    return (1 - Fraction(1, params.n)) * params.u


def bound_Q(params: SystemParams) -> Time:
    """The Dequeue lower-bound quantity min{(3d+2u)/5, d/2+u}."""
    d, u = params.d, params.u
    return min((3 * d + 2 * u) / 5, d / 2 + u)


def stagger_s(params: SystemParams) -> Time:
    """Invocation stagger max{0, Q - u} used by the lower-bound runs."""
    return max(Fraction(0), bound_Q(params) - params.u)


@dataclass(frozen=True)
class EventRecord:
    """One state-machine step at a process.

    ``value`` holds the invocation argument (invoke) or the return value
    (respond). ``peer`` is the receiver of a send or the sender of a
    receive. ``seq`` is the per-sender message counter for send/receive and
    the per-process timer counter for timer_set/timer_expire.
    """

    process: int
    real_time: Time
    local_time: Time
    kind: str
    op: Optional[str] = None
    value: Any = None
    payload: Any = None
    peer: Optional[int] = None
    seq: Optional[int] = None
    duration: Optional[Time] = None

    def moved(self, dt: Time) -> "EventRecord":
        return EventRecord(self.process, self.real_time + dt, self.local_time, self.kind,
                           self.op, self.value, self.payload, self.peer, self.seq, self.duration)


@dataclass(frozen=True)
class MessageRecord:
    sender: int
    receiver: int
    send_time: Time
    receive_time: Time
    payload: Any
    sequence: int

    @property
    def delay(self) -> Time:
        return self.receive_time - self.send_time


@dataclass(frozen=True)
class Run:
    params: SystemParams
    events: tuple  # tuple (per process) of tuples of EventRecord
    clock_offsets: tuple  # tuple of Time, indexed by process
    messages: tuple  # MessageRecords sorted by (sender, sequence)

    def offset(self, p: int) -> Time:
        return self.clock_offsets[p]

    def all_events(self) -> Iterable[EventRecord]:
        for seq in self.events:
            yield from seq


def validate_run(run: Run) -> None:
    """Raise :class:`ModelError` if any structural run invariant fails."""
    n = run.params.n
    if len(run.events) != n or len(run.clock_offsets) != n:
        raise ModelError("run must have one event sequence and one offset per process")
    sends, receives = {}, {}
    for p, seq in enumerate(run.events):
        last = None
        pending = None
        for ev in seq:
            if ev.process != p:
                raise ModelError(f"event of p{ev.process} filed under p{p}")
            if last is not None and ev.real_time < last:
                raise ModelError(f"events at p{p} go backwards in time")
            last = ev.real_time
            if ev.local_time != ev.real_time + run.clock_offsets[p]:
                raise ModelError(f"local time mismatch at p{p}, t={ev.real_time}")
            if ev.kind == INVOKE:
                if pending is not None:
                    raise ModelError(f"overlapping operations at p{p}")
                pending = ev.op
            elif ev.kind == RESPOND:
                if pending != ev.op:
                    raise ModelError(f"response without matching invocation at p{p}")
                pending = None
            elif ev.kind == SEND:
                sends[(p, ev.seq)] = ev
            elif ev.kind == RECEIVE:
                receives[(ev.peer, ev.seq)] = ev
    if set(sends) != set(receives):
        raise ModelError("send and receive events do not match one to one")
    if len(run.messages) != len(sends):
        raise ModelError("message records do not match send events")
    for m in run.messages:
        s, r = sends.get((m.sender, m.sequence)), receives.get((m.sender, m.sequence))
        if s is None or r is None or s.real_time != m.send_time or r.real_time != m.receive_time:
            raise ModelError(f"message record {m.sender}#{m.sequence} disagrees with events")
        if m.receive_time < m.send_time:
            raise ModelError("message received before it was sent")


@dataclass(frozen=True)
class DelayRule:
    """Delay for messages matching sender, receiver and a send-time window.

    ``None`` for ``senders``/``receivers`` matches anyone. The window is
    ``since <= send_time < until`` with missing ends unbounded.
    """

    delay: Time
    senders: Optional[frozenset] = None
    receivers: Optional[frozenset] = None
    since: Optional[Time] = None
    until: Optional[Time] = None

    def __post_init__(self):
        object.__setattr__(self, "delay", as_time(self.delay))
        if self.senders is not None:
            object.__setattr__(self, "senders", frozenset(self.senders))
        if self.receivers is not None:
            object.__setattr__(self, "receivers", frozenset(self.receivers))
        if self.since is not None:
            object.__setattr__(self, "since", as_time(self.since))
        if self.until is not None:
            object.__setattr__(self, "until", as_time(self.until))
        if self.delay < 0:
            raise ModelError(f"negative delay {self.delay}")

    def matches(self, sender: int, receiver: int, send_time: Time) -> bool:
        if self.senders is not None and sender not in self.senders:
            return False
        if self.receivers is not None and receiver not in self.receivers:
            return False
        if self.since is not None and send_time < self.since:
            return False
        if self.until is not None and send_time >= self.until:
            return False
        return True


@dataclass(frozen=True)
class DelayPolicy:
    default_delay: Time
    rules: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "default_delay", as_time(self.default_delay))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.default_delay < 0:
            raise ModelError(f"negative delay {self.default_delay}")

    def delay(self, sender: int, receiver: int, send_time: Time) -> Time:
        for rule in self.rules:
            if rule.matches(sender, receiver, send_time):
                return rule.delay
        return self.default_delay

    @classmethod
    def uniform(cls, delay) -> "DelayPolicy":
        return cls(as_time(delay))


@dataclass(frozen=True)
class Invocation:
    """A scheduled operation. ``time=None`` chains it to the previous
    invocation at the same process: it fires the instant that one responds."""

    process: int
    time: Optional[Time]
    op: str
    arg: Any = None

    def __post_init__(self):
        if self.time is not None:
            object.__setattr__(self, "time", as_time(self.time))
        if self.op not in OPS:
            raise ModelError(f"unknown operation {self.op!r}")
        if self.op == ENQ and (self.arg is None or self.arg is BOTTOM):
            raise ModelError("Enqueue needs an argument other than BOTTOM")
        if self.op == DEQ and self.arg is not None:
            raise ModelError("Dequeue takes no argument")


@dataclass(frozen=True)
class Schedule:
    params: SystemParams
    invocations: tuple
    clock_offsets: tuple
    delay_policy: DelayPolicy
    notes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "invocations", tuple(self.invocations))
        object.__setattr__(self, "clock_offsets", tuple(as_time(c) for c in self.clock_offsets))
        object.__setattr__(self, "notes", tuple(self.notes))
        n = self.params.n
        if len(self.clock_offsets) != n:
            raise ModelError(f"need {n} clock offsets, got {len(self.clock_offsets)}")
        seen = set()
        first = set()
        for inv in self.invocations:
            if not 0 <= inv.process < n:
                raise ModelError(f"process p{inv.process} out of range for n={n}")
            if inv.time is None and inv.process not in first:
                raise ModelError(f"first invocation at p{inv.process} needs an explicit time")
            first.add(inv.process)
            if inv.op == ENQ:
                if inv.arg in seen:
                    raise ModelError(f"duplicate Enqueue argument {inv.arg!r}")
                seen.add(inv.arg)


@dataclass(frozen=True)
class OperationInstance:
    instance_id: int
    process: int
    kind: str
    argument: Any
    return_value: Any
    invoke_time: Time
    response_time: Time

    def precedes(self, other: "OperationInstance") -> bool:
        """Real-time order: self responds before other is invoked.

        Instances at one process are ordered even when the response and the
        next invocation share an instant.
        """
        if self.instance_id == other.instance_id:
            return False
        if self.process == other.process:
            return self.response_time <= other.invoke_time
        return self.response_time < other.invoke_time

    def overlaps(self, other: "OperationInstance") -> bool:
        return not self.precedes(other) and not other.precedes(self)

    def __str__(self):
        if self.kind == ENQ:
            body = f"Enq({self.argument!r})"
        else:
            body = f"Deq->{self.return_value!r}"
        return f"#{self.instance_id} p{self.process} {body} [{self.invoke_time}, {self.response_time}]"


@dataclass(frozen=True)
class History:
    params: SystemParams
    instances: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        args = [op.argument for op in self.instances if op.kind == ENQ]
        if len(args) != len(set(args)):
            raise ModelError("Enqueue arguments must be distinct")
        ids = [op.instance_id for op in self.instances]
        if len(ids) != len(set(ids)):
            raise ModelError("instance ids must be distinct")
        for op in self.instances:
            if op.response_time < op.invoke_time:
                raise ModelError(f"instance {op} responds before it is invoked")
            if op.kind == ENQ and op.return_value is not None:
                raise ModelError("Enqueue carries no return value")
            if op.kind == DEQ and op.argument is not None:
                raise ModelError("Dequeue carries no argument")
        by_proc = {}
        for op in sorted(self.instances, key=lambda o: (o.invoke_time, o.instance_id)):
            prev = by_proc.get(op.process)
            if prev is not None and prev.response_time > op.invoke_time:
                raise ModelError(f"instances at p{op.process} overlap")
            by_proc[op.process] = op

    def __len__(self):
        return len(self.instances)

    def by_id(self) -> dict:
        return {op.instance_id: op for op in self.instances}


def make_history(params: SystemParams, specs: Sequence[tuple]) -> History:
    """Build a history from ``(process, kind, value, invoke, response)`` rows.

    ``value`` is the argument for an Enqueue and the return value for a
    Dequeue. Ids follow the row order.
    """
    ops = []
    for i, (p, kind, value, t0, t1) in enumerate(specs):
        arg, ret = (value, None) if kind == ENQ else (None, value)
        ops.append(OperationInstance(i, p, kind, arg, ret, as_time(t0), as_time(t1)))
    return History(params, tuple(ops))


def extract_history(run: Run) -> History:
    """Pair each invoke with its response; ids follow (invoke time, process)."""
    rows = []
    for p, seq in enumerate(run.events):
        pending = None
        for ev in seq:
            if ev.kind == INVOKE:
                pending = ev
            elif ev.kind == RESPOND:
                if pending is None:
                    raise ModelError(f"response without invocation at p{p}")
                rows.append((pending.real_time, p, pending, ev))
                pending = None
        if pending is not None:
            raise ModelError(
                f"incomplete operation: {pending.op} at p{p} invoked at {pending.real_time} never responded")
    rows.sort(key=lambda r: (r[0], r[1]))
    ops = []
    for i, (_, p, inv, resp) in enumerate(rows):
        if inv.op == ENQ:
            ops.append(OperationInstance(i, p, ENQ, inv.value, None, inv.real_time, resp.real_time))
        else:
            ops.append(OperationInstance(i, p, DEQ, None, resp.value, inv.real_time, resp.real_time))
    return History(run.params, tuple(ops))


def _input_key(ev: EventRecord):
    if ev.kind == INVOKE:
        return (INVOKE, ev.op, ev.value)
    if ev.kind == RECEIVE:
        return (RECEIVE, ev.peer, ev.payload)
    return (TIMER_EXPIRE, ev.payload)


def local_view(run: Run, p: int, until_local: Optional[Time] = None) -> list:
    """Inputs seen by ``p`` as ``(local_time, input)`` pairs, oldest first.

    Inputs are invocations, message receipts and timer expirations; real
    times and internal counters are deliberately left out.
    """
    if not 0 <= p < run.params.n:
        raise ModelError(f"process p{p} out of range")
    out = []
    for ev in run.events[p]:
        if ev.kind not in INPUT_KINDS:
            continue
        if until_local is not None and ev.local_time > until_local:
            break
        out.append((ev.local_time, _input_key(ev)))
    return out
