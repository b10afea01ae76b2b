"""Random admissible schedules for property tests and sweeps."""

from __future__ import annotations

import random
from fractions import Fraction

from .model import (DEQ, ENQ, DelayPolicy, DelayRule, Invocation, Schedule, SystemParams,
                    Time, as_time, epsilon)


def random_offsets(params: SystemParams, rng: random.Random, steps: int = 4) -> tuple:
    """Offsets on a grid inside [0, epsilon], so every pair is within the bound."""
    eps = epsilon(params)
    if eps == 0:
        return (Fraction(0),) * params.n
    return tuple(eps * Fraction(rng.randint(0, steps), steps) for _ in range(params.n))


def random_delay_policy(params: SystemParams, rng: random.Random, horizon: Time,
                        window: Time, steps: int = 4) -> DelayPolicy:
    """Per ordered pair and per send-time window, a delay on a grid in [d-u, d]."""
    d, u = params.d, params.u
    if u == 0:
        return DelayPolicy.uniform(d)
    rules = []
    t = Fraction(0)
    while t < horizon:
        for a in range(params.n):
            for b in range(params.n):
                if a != b:
                    delay = d - u + u * Fraction(rng.randint(0, steps), steps)
                    rules.append(DelayRule(delay, frozenset({a}), frozenset({b}), t, t + window))
        t += window
    return DelayPolicy(d, rules)


def random_schedule(params: SystemParams, rng: random.Random, n_ops: int, spacing,
                    grid=Fraction(1, 2), max_gap=None, enqueue_share: float = 0.5,
                    offsets=None, delays=None) -> Schedule:
    """``n_ops`` operations on random processes.

    Consecutive invocations at one process start at least ``spacing`` apart
    (pick ``spacing`` >= the algorithm's latency) plus a random gap drawn
    from multiples of ``grid``.
    """
    spacing = as_time(spacing)
    grid = as_time(grid)
    if max_gap is None:
        max_gap = params.d
    max_gap = as_time(max_gap)
    slots = int(max_gap / grid)
    next_free = [grid * rng.randint(0, slots) for _ in range(params.n)]
    invs = []
    value = 1
    for _ in range(n_ops):
        p = rng.randrange(params.n)
        t = next_free[p]
        if rng.random() < enqueue_share:
            invs.append(Invocation(p, t, ENQ, value))
            value += 1
        else:
            invs.append(Invocation(p, t, DEQ))
        next_free[p] = t + spacing + grid * rng.randint(0, slots)
    invs.sort(key=lambda i: (i.time, i.process))
    horizon = max(next_free) + 2 * params.d
    if offsets is None:
        offsets = random_offsets(params, rng)
    if delays is None:
        delays = random_delay_policy(params, rng, horizon, params.d / 2)
    return Schedule(params, invs, offsets, delays)
