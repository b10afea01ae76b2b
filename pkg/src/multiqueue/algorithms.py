"""Queue algorithms for the simulator.

* :func:`zero_u_multiplicity_queue` -- the d/2-latency multiplicity queue
  for systems where every message takes exactly d.
* :func:`full_info_fifo_baseline` -- a slow linearizable FIFO queue that
  waits d + epsilon before answering.
* :func:`strawman_fast` -- the baseline with a shorter wait; too fast to be
  correct, used as a negative control.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .model import BOTTOM, DEQ, ENQ, SystemParams, Time, as_time, epsilon
from .simulator import ProcessBehavior, Respond, Send, SetTimer


@dataclass(frozen=True, order=True)
class Timestamp:
    """Local clock reading with the process id breaking ties."""
    clock_value: Time
    pid: int

    def as_tuple(self):
        return (self.clock_value, self.pid)


@dataclass(frozen=True)
class ZeroUState:
    pid: int
    half_d: Time
    local_queue: tuple = ()  # (enqueue timestamp, value), oldest first
    most_recent_dequeue: Time = Fraction(0)  # verbatim variant only
    removed: tuple = ()  # (enqueue timestamp, earliest consumer clock), completed variant only


class ZeroUMultiplicityQueue(ProcessBehavior):
    """Broadcast every operation, answer d/2 later.

    Enqueue applies locally d after invocation, when every other process
    receives it. Dequeue answers with the local front. A remote Dequeue is
    applied on receipt unless a concurrent Dequeue already removed the
    element it returned, so concurrent Dequeues consume one element.
    Only ``d`` is read from the parameters.

    With ``verbatim=True`` the handlers follow the published pseudocode to
    the letter, including the single ``mostRecentDequeue`` spacing guard.
    That version loses or duplicates elements when a Dequeue returns
    BOTTOM, when Enqueues apply at the same instant, and when two Dequeue
    clocks are exactly d/2 apart. The default variant completes it (see the
    README for counterexamples):

    * the local queue is kept in enqueue-timestamp order, so Enqueues that
      apply at the same instant land in the same order everywhere;
    * the guard is per element. A Dequeue stamped c saw exactly the
      enqueues stamped at most c - d/2 and the removals whose earliest
      consumer is stamped at most c - d/2 (receives are handled before
      timers, so exactly d/2 counts as seen). Every such fact has reached
      the receiver by c + d, so it can tell which element the Dequeue
      returned: already removed here means same set (the removal's
      earliest stamp is lowered to c), still queued means it must be the
      front and is removed, none means BOTTOM and nothing changes.
    """

    def __init__(self, verbatim: bool = False):
        self.verbatim = verbatim
        self.name = "zero-u-verbatim" if verbatim else "zero-u"

    def initial_state(self, pid, params: SystemParams):
        return ZeroUState(pid, params.d / 2)

    def _apply_enqueue(self, state, ts, arg):
        if self.verbatim:
            return replace(state, local_queue=state.local_queue + ((ts, arg),))
        queue = tuple(sorted(state.local_queue + ((ts, arg),), key=lambda e: e[0]))
        return replace(state, local_queue=queue)

    def on_invoke(self, state, op, arg, now):
        ts = (now, state.pid)
        if op == ENQ:
            msg = ("enq", arg) if self.verbatim else ("enq", arg, ts)
            return state, [Send(msg), SetTimer(state.half_d, ("enq", arg, ts, "return"))]
        return state, [Send(("deq", ts)), SetTimer(state.half_d, ("deq", ts))]

    def on_timer(self, state, payload, now):
        if payload[0] == "enq":
            if payload[-1] == "return":
                _, arg, ts, _ = payload
                return state, [Respond(ENQ), SetTimer(state.half_d, ("enq", arg, ts, "apply"))]
            return self._apply_enqueue(state, payload[2], payload[1]), []
        clock_val = payload[1][0]
        if not state.local_queue:
            if self.verbatim:
                state = replace(state, most_recent_dequeue=clock_val)
            return state, [Respond(DEQ, BOTTOM)]
        (ets, value), rest = state.local_queue[0], state.local_queue[1:]
        if self.verbatim:
            new = replace(state, local_queue=rest, most_recent_dequeue=clock_val)
        else:
            new = replace(state, local_queue=rest, removed=state.removed + ((ets, clock_val),))
        return new, [Respond(DEQ, value)]

    def on_receive(self, state, payload, sender, now):
        if payload[0] == "enq":
            ts = payload[2] if len(payload) > 2 else (now, sender)
            return self._apply_enqueue(state, ts, payload[1]), []
        clock_val = payload[1][0]
        if self.verbatim:
            if clock_val > state.most_recent_dequeue + state.half_d:
                return replace(state, local_queue=state.local_queue[1:],
                               most_recent_dequeue=clock_val), []
            return state, []
        horizon = clock_val - state.half_d
        for k, (ets, first) in enumerate(state.removed):
            if ets[0] <= horizon and first > horizon:
                removed = list(state.removed)
                removed[k] = (ets, min(first, clock_val))
                return replace(state, removed=tuple(removed)), []
        if state.local_queue and state.local_queue[0][0][0] <= horizon:
            ets = state.local_queue[0][0]
            return replace(state, local_queue=state.local_queue[1:],
                           removed=state.removed + ((ets, clock_val),)), []
        return state, []


@dataclass(frozen=True)
class ReplayState:
    pid: int
    wait: Time
    known: frozenset = frozenset()  # (timestamp tuple, op, arg)


def replay_front(records, ts) -> object:
    """Return value of the Dequeue stamped ``ts`` after replaying, in
    timestamp order, every known operation stamped at or before it."""
    queue = []
    result = BOTTOM
    for rts, op, arg in sorted(records, key=lambda r: r[0]):
        if rts > ts:
            break
        if op == ENQ:
            queue.append(arg)
        else:
            result = queue.pop(0) if queue else BOTTOM
    return result


class TimestampReplayQueue(ProcessBehavior):
    """Every operation broadcasts a timestamped record and answers after a
    fixed local wait by replaying everything it has heard of."""

    def __init__(self, wait=None, name="baseline"):
        self.fixed_wait = None if wait is None else as_time(wait)
        self.name = name

    def wait_for(self, params: SystemParams) -> Time:
        if self.fixed_wait is not None:
            return self.fixed_wait
        return params.d + epsilon(params)

    def initial_state(self, pid, params):
        return ReplayState(pid, self.wait_for(params))

    def on_invoke(self, state, op, arg, now):
        rec = ((now, state.pid), op, arg)
        new = replace(state, known=state.known | {rec})
        return new, [Send(("op",) + rec), SetTimer(state.wait, ("respond", rec))]

    def on_receive(self, state, payload, sender, now):
        _, ts, op, arg = payload
        return replace(state, known=state.known | {(ts, op, arg)}), []

    def on_timer(self, state, payload, now):
        ts, op, _ = payload[1]
        if op == ENQ:
            return state, [Respond(ENQ)]
        return state, [Respond(DEQ, replay_front(state.known, ts))]


def zero_u_multiplicity_queue(verbatim: bool = False) -> ProcessBehavior:
    return ZeroUMultiplicityQueue(verbatim)


def full_info_fifo_baseline() -> ProcessBehavior:
    return TimestampReplayQueue()


def strawman_fast(T) -> ProcessBehavior:
    T = as_time(T)
    if T <= 0:
        raise ValueError(f"strawman wait must be positive, got {T}")
    return TimestampReplayQueue(T, name=f"strawman:{T}")


def algorithm_by_name(name: str) -> ProcessBehavior:
    """Parse ``zero-u``, ``baseline`` or ``strawman:T``."""
    if name == "zero-u":
        return zero_u_multiplicity_queue()
    if name == "zero-u-verbatim":
        return zero_u_multiplicity_queue(verbatim=True)
    if name == "baseline":
        return full_info_fifo_baseline()
    if name.startswith("strawman:"):
        return strawman_fast(name.split(":", 1)[1])
    raise ValueError(f"unknown algorithm {name!r} (expected zero-u, zero-u-verbatim, baseline or strawman:T)")
