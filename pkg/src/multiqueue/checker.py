"""Set-linearizability checking for multiplicity-queue histories.

A legal sequence of sets obeys three rules: every Enqueue sits alone,
the Dequeues sharing a set return one value, and replaying the sets in
order against a FIFO queue, each Dequeue set returns the current front
(or BOTTOM when empty) and removes it once for the whole set. The
sequence must also respect real-time order: if ``a`` responds before
``b`` is invoked, ``a``'s set comes strictly first.

The search builds the sequence front to back. The next set must be drawn
from the *frontier*, the unplaced instances none of whose real-time
predecessors are still unplaced; that is both necessary (anything else
breaks real-time order) and sufficient, so the search is complete.
Frontier members never precede one another, so a set drawn from it is
automatically made of pairwise overlapping instances. Failed
(placed-set, queue) states are memoised.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional

from .model import BOTTOM, DEQ, ENQ, INVOKE, History, ModelError, Run, extract_history

DEFAULT_CAP = 12
ORACLE_CAP = 6


class CheckerError(ModelError):
    pass


@dataclass(frozen=True)
class SetLinearization:
    sequence: tuple  # tuple of frozensets of instance ids

    @classmethod
    def of(cls, sets) -> "SetLinearization":
        return cls(tuple(frozenset(s) for s in sets))

    def __len__(self):
        return len(self.sequence)


@dataclass(frozen=True)
class CheckVerdict:
    legal: bool
    witness: Optional[SetLinearization] = None
    violation: Optional[str] = None

    def __bool__(self):
        return self.legal


def _fail(msg: str) -> CheckVerdict:
    return CheckVerdict(False, None, msg)


def is_legal_sequence(seq: SetLinearization, history: History) -> CheckVerdict:
    ops = history.by_id()
    flat = [i for s in seq.sequence for i in s]
    if len(flat) != len(set(flat)) or set(flat) != set(ops):
        raise CheckerError("coverage mismatch: sequence must contain every instance exactly once")
    position = {}
    queue = []
    for k, group in enumerate(seq.sequence):
        if not group:
            return _fail(f"set {k} is empty")
        members = [ops[i] for i in sorted(group)]
        kinds = {op.kind for op in members}
        if ENQ in kinds:
            if len(members) != 1:
                return _fail(f"clause (i): Enqueue #{members[0].instance_id} is not in a singleton set")
            queue.append(members[0].argument)
        else:
            values = {op.return_value for op in members}
            if len(values) != 1:
                return _fail(f"clause (ii): set {k} Dequeues return different values {values}")
            value = values.pop()
            front = queue[0] if queue else BOTTOM
            if value != front:
                if value is not BOTTOM and value not in queue:
                    reason = "is not available (never enqueued before, or already returned)"
                else:
                    reason = f"but the front is {front!r}"
                return _fail(f"clause (iii): set {k} returns {value!r} {reason}")
            if queue:
                queue.pop(0)
        for op in members:
            position[op.instance_id] = k
    for a in history.instances:
        for b in history.instances:
            if a.precedes(b) and position[a.instance_id] >= position[b.instance_id]:
                return _fail(f"real-time order: #{a.instance_id} responds before "
                             f"#{b.instance_id} is invoked but is not in an earlier set")
    return CheckVerdict(True, seq, None)


def _search(history: History, cap: int, singletons: bool) -> CheckVerdict:
    if len(history) > cap:
        raise CheckerError(f"instance cap exceeded: {len(history)} > {cap}")
    ops = sorted(history.instances, key=lambda o: (o.invoke_time, o.instance_id))
    ids = [o.instance_id for o in ops]
    idx = {o.instance_id: k for k, o in enumerate(ops)}
    m = len(ops)
    preds = [0] * m
    for a in ops:
        for b in ops:
            if a.precedes(b):
                preds[idx[b.instance_id]] |= 1 << idx[a.instance_id]
    full = (1 << m) - 1
    dead = set()
    path = []

    def dfs(placed: int, queue: tuple) -> bool:
        if placed == full:
            return True
        key = (placed, queue)
        if key in dead:
            return False
        frontier = [k for k in range(m) if not placed >> k & 1 and preds[k] & ~placed == 0]
        front = queue[0] if queue else BOTTOM
        for k in frontier:
            if ops[k].kind == ENQ:
                path.append(frozenset({ids[k]}))
                if dfs(placed | 1 << k, queue + (ops[k].argument,)):
                    return True
                path.pop()
        takers = [k for k in frontier if ops[k].kind == DEQ and ops[k].return_value == front]
        rest = queue[1:]
        sizes = [1] if singletons else range(len(takers), 0, -1)
        for size in sizes:
            for group in combinations(takers, size):
                mask = 0
                for k in group:
                    mask |= 1 << k
                path.append(frozenset(ids[k] for k in group))
                if dfs(placed | mask, rest):
                    return True
                path.pop()
        dead.add(key)
        return False

    if dfs(0, ()):
        return CheckVerdict(True, SetLinearization(tuple(path)), None)
    what = "linearization" if singletons else "set-linearization"
    return _fail(f"exhaustive search: no legal {what} exists")


def check_multiplicity_setlin(history: History, cap: int = DEFAULT_CAP) -> CheckVerdict:
    return _search(history, cap, singletons=False)


def check_linearizable_fifo(history: History, cap: int = DEFAULT_CAP) -> CheckVerdict:
    return _search(history, cap, singletons=True)


def ordered_set_partitions(items: list):
    """Every way to split ``items`` into an ordered sequence of non-empty blocks."""
    if not items:
        yield ()
        return
    n = len(items)
    # choose the first block as any non-empty subset, recurse on the rest
    for mask in range(1, 1 << n):
        block = frozenset(items[i] for i in range(n) if mask >> i & 1)
        rest = [items[i] for i in range(n) if not mask >> i & 1]
        for tail in ordered_set_partitions(rest):
            yield (block,) + tail


@lru_cache(maxsize=4096)
def _time_respecting_partitions(m: int, preds: tuple) -> tuple:
    """All ordered set partitions of range(m) that respect ``preds``
    (bitmask of real-time predecessors per index). Depends only on the
    precedence structure, so it is shared by every labelling of it."""
    keep = []
    for parts in ordered_set_partitions(list(range(m))):
        placed = 0
        for block in parts:
            if any(preds[k] & ~placed for k in block):
                break
            for k in block:
                placed |= 1 << k
        else:
            keep.append(tuple(tuple(sorted(b)) for b in parts))
    return tuple(keep)


def _replays(parts, ops) -> bool:
    queue = []
    for block in parts:
        members = [ops[k] for k in block]
        if members[0].kind == ENQ or len(members) > 1 and any(o.kind == ENQ for o in members):
            if len(members) != 1:
                return False
            queue.append(members[0].argument)
            continue
        value = members[0].return_value
        if any(o.return_value != value for o in members):
            return False
        if value != (queue[0] if queue else BOTTOM):
            return False
        if queue:
            queue.pop(0)
    return True


def brute_force_setlin(history: History, cap: int = ORACLE_CAP) -> CheckVerdict:
    """Try every ordered set partition. No search, no pruning.

    Partitions breaking real-time order are discarded first (that filter is
    cached per precedence structure); the rest are replayed, and a hit is
    confirmed with :func:`is_legal_sequence`.
    """
    if len(history) > cap:
        raise CheckerError(f"size cap exceeded: {len(history)} > {cap}")
    ops = sorted(history.instances, key=lambda o: o.instance_id)
    preds = tuple(sum(1 << i for i, a in enumerate(ops) if a.precedes(b)) for b in ops)
    for parts in _time_respecting_partitions(len(ops), preds):
        if _replays(parts, ops):
            seq = SetLinearization(tuple(frozenset(ops[k].instance_id for k in b) for b in parts))
            verdict = is_legal_sequence(seq, history)
            if not verdict.legal:
                raise CheckerError(f"oracle disagreement on {seq}: {verdict.violation}")
            return verdict
    return _fail("brute force: no ordered set partition is legal")


TIE_PID = "pid"
TIE_ENQUEUE_FIRST = "enqueue-first"


def construction4_certificate(run: Run, tie_break: str = TIE_PID):
    """Timestamp-ordered sets for a zero-u run, validated against its history.

    Enqueues are stamped (invocation clock + d/2, pid); Dequeues (invocation
    clock, pid). Dequeues returning the same value share a set stamped by
    its smallest member; BOTTOM Dequeues stay singletons since they remove
    nothing. Sets are sorted by stamp, pid breaking equal clocks.

    ``tie_break="enqueue-first"`` instead puts every Enqueue ahead of every
    Dequeue set on equal clocks, which is what receive-before-timer delivery
    actually does at the invoker.
    """
    if tie_break not in (TIE_PID, TIE_ENQUEUE_FIRST):
        raise CheckerError(f"unknown tie_break {tie_break!r}")
    history = extract_history(run)
    half = run.params.d / 2
    clocks = {}
    for p, seq in enumerate(run.events):
        for ev in seq:
            if ev.kind == INVOKE:
                clocks[(p, ev.real_time)] = ev.local_time

    def stamp(clock, pid, is_deq):
        if tie_break == TIE_PID:
            return (clock, pid, int(is_deq))
        return (clock, int(is_deq), pid)

    entries = []
    by_value = {}
    for op in history.instances:
        clock = clocks[(op.process, op.invoke_time)]
        if op.kind == ENQ:
            entries.append((stamp(clock + half, op.process, False), frozenset({op.instance_id})))
        elif op.return_value is BOTTOM:
            entries.append((stamp(clock, op.process, True), frozenset({op.instance_id})))
        else:
            by_value.setdefault(op.return_value, []).append((stamp(clock, op.process, True), op))
    for value, members in by_value.items():
        group = [op for _, op in members]
        for a in group:
            for b in group:
                if a.precedes(b):
                    raise CheckerError(
                        f"grouping collision: non-overlapping Dequeues #{a.instance_id} and "
                        f"#{b.instance_id} both return {value!r}")
        entries.append((min(ts for ts, _ in members), frozenset(op.instance_id for op in group)))
    entries.sort(key=lambda e: e[0])
    pi = SetLinearization(tuple(s for _, s in entries))
    return pi, is_legal_sequence(pi, history)
