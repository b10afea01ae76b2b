"""Builders for the lower-bound run families and the base-case X analysis.

Every family starts with p0 enqueueing 1..n back to back from time 0 and
then anchors its Dequeue invocations on ``t1``, a time by which the
enqueue prefix has gone quiet.

Delay conventions: unless a family overrides them, messages from a lower
index to a higher index take d - u and the reverse direction takes d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .model import (DEQ, ENQ, DelayPolicy, DelayRule, Invocation, ModelError, Schedule,
                    SystemParams, Time, as_time, bound_Q, epsilon, stagger_s)
from .shifting import ShiftVector, is_admissible, runs_equal, shift
from .simulator import ProcessBehavior, simulate

MINIMAL_N_CAP = 10 ** 6


class BoundError(ModelError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    params: SystemParams
    t1: Time
    dequeue_latency_bound: Optional[Time] = None

    def __post_init__(self):
        object.__setattr__(self, "t1", as_time(self.t1))
        if self.dequeue_latency_bound is not None:
            object.__setattr__(self, "dequeue_latency_bound", as_time(self.dequeue_latency_bound))

    @property
    def s(self) -> Time:
        return stagger_s(self.params)

    @property
    def Q(self) -> Time:
        return bound_Q(self.params)


@dataclass(frozen=True)
class RationalInterval:
    lower: Time
    lower_strict: bool
    upper: Time
    upper_strict: bool

    @property
    def empty(self) -> bool:
        if self.lower > self.upper:
            return True
        return self.lower == self.upper and (self.lower_strict or self.upper_strict)

    def __contains__(self, x) -> bool:
        x = as_time(x)
        above = x > self.lower if self.lower_strict else x >= self.lower
        below = x < self.upper if self.upper_strict else x <= self.upper
        return above and below

    def midpoint(self) -> Time:
        return (self.lower + self.upper) / 2

    def __str__(self):
        if self.empty:
            return "empty"
        lb = "(" if self.lower_strict else "["
        rb = ")" if self.upper_strict else "]"
        return f"{lb}{self.lower}, {self.upper}{rb}"


def enqueue_prefix(n: int) -> list:
    """p0 runs Enqueue(1) .. Enqueue(n) back to back starting at time 0."""
    return [Invocation(0, Fraction(0) if v == 1 else None, ENQ, v) for v in range(1, n + 1)]


def default_t1(params: SystemParams, behavior: ProcessBehavior) -> Time:
    """First quiescence of the enqueue prefix with every delay at d, plus d.

    The slack of d keeps the prefix clear of the dequeue phase under any
    shift smaller than d, as used by the S_3 / S_3^X comparison.
    """
    sched = Schedule(params, enqueue_prefix(params.n), (0,) * params.n,
                     DelayPolicy.uniform(params.d))
    out = simulate(behavior, sched)
    return out.quiescence_times[0] + params.d


def make_config(params: SystemParams, behavior: ProcessBehavior, dequeue_latency_bound=None,
                t1=None) -> ScenarioConfig:
    if t1 is None:
        t1 = default_t1(params, behavior)
    return ScenarioConfig(params, t1, dequeue_latency_bound)


def _ordered_rules(params: SystemParams, group: range, up: Time, down: Time) -> list:
    """Rules for messages inside ``group``: lower->higher ``up``, higher->lower ``down``."""
    rules = []
    members = list(group)
    for a in members:
        higher = frozenset(b for b in members if b > a)
        lower = frozenset(b for b in members if b < a)
        if higher:
            rules.append(DelayRule(up, frozenset({a}), higher))
        if lower:
            rules.append(DelayRule(down, frozenset({a}), lower))
    return rules


def _base_rules(params: SystemParams) -> list:
    return _ordered_rules(params, range(params.n), params.d - params.u, params.d)


def _check_k(k: int, lo: int, hi: int, what: str):
    if not isinstance(k, int) or not lo <= k <= hi:
        raise ModelError(f"{what}: k={k} outside {lo}..{hi}")


def build_Dk(cfg: ScenarioConfig, k: int) -> Schedule:
    params = cfg.params
    n, d, u, s, t1 = params.n, params.d, params.u, cfg.s, cfg.t1
    _check_k(k, 1, n, "D_k")
    invs = enqueue_prefix(n)
    for i in range(k):
        invs.append(Invocation(i, t1 + i * s, DEQ))
    for j in range(k, n):
        invs.append(Invocation(j, t1 + (j - 1) * s + (s + u), DEQ))
    offsets = [Fraction(0)]
    offsets += [Fraction(i, n) * u for i in range(1, k)]
    offsets += [Fraction(j - n, n) * u for j in range(k, n)]
    first, second = frozenset(range(k)), frozenset(range(k, n))
    rules = []
    if second:
        rules.append(DelayRule(d, first, second))
        rules.append(DelayRule(d - u, second, first))
    rules += _ordered_rules(params, range(k), d - u, d)
    rules += _ordered_rules(params, range(k, n), d - u, d)
    return Schedule(params, invs, offsets, DelayPolicy(d, rules))


def t_star(cfg: ScenarioConfig, k: int) -> Time:
    """t1 + k (d - u): after it, some construction messages take the full d."""
    if not 0 <= k < cfg.params.n:
        raise ModelError(f"t_star: k={k} outside 0..{cfg.params.n - 1}")
    return cfg.t1 + k * (cfg.params.d - cfg.params.u)


def _s_family(cfg: ScenarioConfig, dequeuers: int, slow_links: list, extra_rules=()) -> Schedule:
    params = cfg.params
    n, d, u = params.n, params.d, params.u
    invs = enqueue_prefix(n)
    invs += [Invocation(i, cfg.t1 + i * cfg.s, DEQ) for i in range(dequeuers)]
    offsets = [Fraction(0)] + [Fraction(i, n) * u for i in range(1, n)]
    rules = list(extra_rules)
    for a in slow_links:
        rules.append(DelayRule(d, frozenset({a}), frozenset({a + 1}), since=t_star(cfg, a)))
    rules += _base_rules(params)
    return Schedule(params, invs, offsets, DelayPolicy(d, rules))


def build_Sk(cfg: ScenarioConfig, k: int) -> Schedule:
    _check_k(k, 3, cfg.params.n, "S_k")
    return _s_family(cfg, k, [k - 2])


def build_Sk_prime(cfg: ScenarioConfig, k: int) -> Schedule:
    """S_{k-1} plus a Dequeue at p_{k-1} and a slowed p_{k-2} -> p_{k-1} link."""
    _check_k(k, 3, cfg.params.n, "S_k'")
    return _s_family(cfg, k, [k - 3, k - 2])


def s3x_admissible_range(params: SystemParams) -> tuple:
    return Fraction(0), (Fraction(params.n - 2, params.n)) * params.u


def build_S3X(cfg: ScenarioConfig, X) -> Schedule:
    """S_3 with p_1 moved X earlier and its links re-timed.

    Messages of the Dequeue phase (sent at or after t1 in the sender's own
    frame, i.e. t1 - X for p_1) to or from p_1 take the adjusted delays;
    the enqueue prefix keeps S_3's delays. The result carries a note when X
    makes it inadmissible.
    """
    params = cfg.params
    n, d, u = params.n, params.d, params.u
    if n < 3:
        raise ModelError("S_3^X needs n >= 3")
    X = as_time(X)
    t1 = cfg.t1
    others = frozenset(range(2, n))
    p0, p1, p2 = frozenset({0}), frozenset({1}), frozenset({2})
    adjusted = [
        DelayRule(d, p0, p1, since=t1),
        DelayRule(d, p1, p0, since=t1 - X),
        DelayRule(d, p1, p2, since=t_star(cfg, 1) - X),
        DelayRule(d - u + X, p1, others, since=t1 - X),
        DelayRule(d - X, others, p1, since=t1),
    ]
    base = _s_family(cfg, 3, [1], adjusted)
    invs = [i if not (i.process == 1 and i.op == DEQ) else Invocation(1, i.time - X, DEQ)
            for i in base.invocations]
    offsets = list(base.clock_offsets)
    offsets[1] += X
    notes = []
    lo, hi = s3x_admissible_range(params)
    if not lo <= X <= hi or X > u:
        notes.append(f"inadmissible by construction: X={X} outside [{lo}, {hi}]")
    return Schedule(params, invs, offsets, base.delay_policy, tuple(notes))


def _need_bound(cfg: ScenarioConfig) -> Time:
    deq = cfg.dequeue_latency_bound
    if deq is None:
        raise BoundError("dequeue_latency_bound is required")
    if not 0 < deq < bound_Q(cfg.params):
        raise BoundError(f"bound violated: need 0 < |Dequeue| < Q = {bound_Q(cfg.params)}, got {deq}")
    return deq


def x_bounds(cfg: ScenarioConfig) -> dict:
    """The two lower and three upper bounds on X, each as (value, strict)."""
    deq = _need_bound(cfg)
    p = cfg.params
    d, u, n, Q = p.d, p.u, p.n, bound_Q(p)
    return {
        "lower": [(Fraction(0), False), (deq + Q - (d + u), True)],
        "upper": [(d - deq, True), (2 * d + u - 2 * Q - deq, True),
                  (Fraction(n - 2, n) * u, False)],
    }


def x_constraint_interval(cfg: ScenarioConfig) -> RationalInterval:
    b = x_bounds(cfg)
    lo = max(v for v, _ in b["lower"])
    lo_strict = any(s for v, s in b["lower"] if v == lo)
    hi = min(v for v, _ in b["upper"])
    hi_strict = any(s for v, s in b["upper"] if v == hi)
    return RationalInterval(lo, lo_strict, hi, hi_strict)


def _least_n_above(x: Fraction) -> int:
    """Smallest integer strictly greater than x."""
    return math.floor(x) + 1


def minimal_n_terms(cfg: ScenarioConfig) -> dict:
    p = cfg.params
    d, u = p.d, p.u
    if u >= d:
        raise BoundError("undefined at u=d")
    deq = _need_bound(cfg)
    Q = bound_Q(p)
    # N0: |Dequeue| < d/2 + (n-2)u/n, i.e. 2u/n < u - (|Dequeue| - d/2)
    slack = u - (deq - d / 2)
    if deq < d / 2:
        n0 = 2
    elif slack <= 0 or u == 0:
        n0 = None
    else:
        n0 = max(2, _least_n_above(2 * u / slack))
    n1 = max(2, _least_n_above(Q / (d - u) + 1))
    n2 = max(2, _least_n_above(d / (d - Q)))
    return {"N0": n0, "N1": n1, "N2": n2}


def minimal_n(cfg: ScenarioConfig) -> int:
    terms = minimal_n_terms(cfg)
    if terms["N0"] is None:
        raise BoundError("minimal n overflow: N0 does not exist for these parameters")
    n = max(terms.values())
    if n > MINIMAL_N_CAP:
        raise BoundError(f"minimal n overflow: {n} exceeds cap {MINIMAL_N_CAP}")
    return n


def lemma1_vector(n: int, k: int, u) -> ShiftVector:
    """Zero except -u at index k-1."""
    return ShiftVector.unit(n, k - 1, -as_time(u))


@dataclass(frozen=True)
class Lemma1Step:
    k: int
    runs_equal: bool
    prev_admissible: bool
    next_admissible: bool

    @property
    def ok(self) -> bool:
        return self.runs_equal and self.prev_admissible and self.next_admissible


@dataclass(frozen=True)
class Lemma1Report:
    steps: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps)


def verify_lemma1_chain(cfg: ScenarioConfig, behavior: ProcessBehavior,
                        vector: Optional[Callable[[int], ShiftVector]] = None) -> Lemma1Report:
    """For 2 <= k < n check D_k == Shift(D_{k-1}, vector(k)) on simulated runs."""
    n = cfg.params.n
    if vector is None:
        vector = lambda k: lemma1_vector(n, k, cfg.params.u)
    runs = {}

    def run_of(k):
        if k not in runs:
            runs[k] = simulate(behavior, build_Dk(cfg, k)).run
        return runs[k]

    steps = []
    for k in range(2, n):
        prev, nxt = run_of(k - 1), run_of(k)
        try:
            equal = runs_equal(shift(prev, vector(k)), nxt)
        except ModelError:
            equal = False
        steps.append(Lemma1Step(k, equal, is_admissible(prev).admissible,
                                is_admissible(nxt).admissible))
    return Lemma1Report(tuple(steps))
