"""Shifting runs, admissibility verdicts, and indistinguishability horizons."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .model import (MessageRecord, ModelError, Run, Time, as_time, epsilon,
                    local_view)
from .trace import canonical_json, encode_value

NEVER = "never"

DELAY_TOO_SMALL = "delay_too_small"
DELAY_TOO_LARGE = "delay_too_large"
SKEW_EXCEEDED = "skew_exceeded"


class ShiftError(ModelError):
    pass


@dataclass(frozen=True)
class ShiftVector:
    offsets: tuple

    @classmethod
    def of(cls, n: int, values: Union[Sequence, Mapping, "ShiftVector"]) -> "ShiftVector":
        if isinstance(values, ShiftVector):
            values = values.offsets
        if isinstance(values, Mapping):
            out = [Fraction(0)] * n
            for p, v in values.items():
                out[p] = as_time(v)
        else:
            out = [as_time(v) for v in values] + [Fraction(0)] * (n - len(values))
        if len(out) != n:
            raise ShiftError(f"shift vector has {len(out)} entries for {n} processes")
        return cls(tuple(out))

    @classmethod
    def unit(cls, n: int, index: int, amount) -> "ShiftVector":
        return cls.of(n, {index: amount})

    def __neg__(self):
        return ShiftVector(tuple(-v for v in self.offsets))

    def __add__(self, other: "ShiftVector"):
        return ShiftVector(tuple(a + b for a, b in zip(self.offsets, other.offsets)))

    def __getitem__(self, i):
        return self.offsets[i]


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: tuple
    amount: Time


@dataclass(frozen=True)
class AdmissibilityVerdict:
    admissible: bool
    violations: tuple = ()

    def __bool__(self):
        return self.admissible


def shift(run: Run, v) -> Run:
    """Move every event at p_i by v[i] in real time, keeping local times.

    Raises :class:`ShiftError` if some message would arrive before it is
    sent. Admissibility is not checked.
    """
    n = run.params.n
    v = ShiftVector.of(n, v)
    messages = []
    for m in run.messages:
        new = MessageRecord(m.sender, m.receiver, m.send_time + v[m.sender],
                            m.receive_time + v[m.receiver], m.payload, m.sequence)
        if new.delay < 0:
            raise ShiftError(
                f"negative delay {new.delay} on p{m.sender}->p{m.receiver} message #{m.sequence}")
        messages.append(new)
    events = tuple(tuple(ev.moved(v[p]) for ev in seq) for p, seq in enumerate(run.events))
    offsets = tuple(c - v[p] for p, c in enumerate(run.clock_offsets))
    return Run(run.params, events, offsets, tuple(messages))


def is_admissible(run: Run) -> AdmissibilityVerdict:
    params = run.params
    lo, hi = params.d - params.u, params.d
    out = []
    for m in run.messages:
        if m.delay < lo:
            out.append(Violation(DELAY_TOO_SMALL, (m.sender, m.receiver, m.sequence), lo - m.delay))
        elif m.delay > hi:
            out.append(Violation(DELAY_TOO_LARGE, (m.sender, m.receiver, m.sequence), m.delay - hi))
    eps = epsilon(params)
    offs = run.clock_offsets
    for i in range(len(offs)):
        for j in range(i + 1, len(offs)):
            gap = abs(offs[i] - offs[j])
            if gap > eps:
                out.append(Violation(SKEW_EXCEEDED, (i, j), gap - eps))
    return AdmissibilityVerdict(not out, tuple(out))


def max_skew(run_or_offsets) -> Time:
    offs = getattr(run_or_offsets, "clock_offsets", run_or_offsets)
    return max(offs) - min(offs)


def _grouped_view(run: Run, p: int, since: Optional[Time]):
    groups = {}
    for t, inp in local_view(run, p):
        if since is not None and t < since:
            continue
        groups.setdefault(t, Counter())[canonical_json(encode_value(inp))] += 1
    return groups


def earliest_distinguishing_time(a: Run, b: Run, p: int, since: Optional[Time] = None):
    """Smallest local time at which ``p`` sees different inputs in ``a`` and
    ``b``, or :data:`NEVER`.

    Inputs sharing a local instant are compared as multisets. A message
    present in one run but not (yet) in the other shows up at the local
    time it arrives in the run that has it, so its absence is observable
    exactly then. ``since`` restricts the comparison to local times at or
    after it.
    """
    if a.params != b.params:
        raise ModelError("runs have different system parameters")
    ga, gb = _grouped_view(a, p, since), _grouped_view(b, p, since)
    for t in sorted(set(ga) | set(gb)):
        if ga.get(t) != gb.get(t):
            return t
    return NEVER


def runs_equal(a: Run, b: Run) -> bool:
    if a.params != b.params or a.clock_offsets != b.clock_offsets:
        return False
    if a.events != b.events:
        return False
    key = lambda m: (m.sender, m.sequence)
    return sorted(a.messages, key=key) == sorted(b.messages, key=key)

