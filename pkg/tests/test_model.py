from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from multiqueue import (BOTTOM, DEQ, ENQ, History, ModelError, SystemParams, as_time, bound_Q,
                        epsilon, extract_history, local_view, make_history, simulate, stagger_s,
                        zero_u_multiplicity_queue)
from multiqueue.model import DelayPolicy, DelayRule, Invocation, OperationInstance, Schedule

from conftest import schedule


@pytest.mark.parametrize("n,d,u,expected", [(4, 10, 2, F(3, 2)), (2, 10, 0, 0), (10, 5, 5, F(9, 2))])
def test_epsilon_examples(n, d, u, expected):
    assert epsilon(SystemParams(n, d, u)) == expected


@pytest.mark.parametrize("d,u,expected", [(10, 0, 5), (10, 10, 10), (6, 1, 4)])
def test_bound_Q_examples(d, u, expected):
    assert bound_Q(SystemParams(2, d, u)) == expected


def test_bound_Q_crossover_both_branches_equal():
    # at u = d/6 the two branches coincide
    d, u = F(6), F(1)
    assert (3 * d + 2 * u) / 5 == d / 2 + u == 4


@pytest.mark.parametrize("d,u,expected", [(10, 0, 5), (10, 10, 0), (10, 2, F(24, 5))])
def test_stagger_examples(d, u, expected):
    assert stagger_s(SystemParams(3, d, u)) == expected


def test_stagger_d10_u2_by_both_branches():
    d, u = F(10), F(2)
    first, second = (3 * d + 2 * u) / 5, d / 2 + u
    assert (first, second) == (F(34, 5), 7)
    assert stagger_s(SystemParams(3, d, u)) == max(0, min(first, second) - u) == F(24, 5)


@pytest.mark.parametrize("bad", [(1, 10, 0), (3, 0, 0), (3, 10, 11), (3, 10, -1)])
def test_params_validation(bad):
    with pytest.raises(ModelError):
        SystemParams(*bad)


def test_as_time_accepts_exact_forms_only():
    assert as_time("3/4") == F(3, 4)
    assert as_time({"num": 6, "den": 8}) == F(3, 4)
    assert as_time(2) == 2
    with pytest.raises(ModelError):
        as_time(0.5)
    with pytest.raises(ModelError):
        as_time(True)
    with pytest.raises(ModelError):
        as_time("x/2")


@given(st.integers(2, 40), st.fractions(0, 50))
def test_epsilon_below_u_and_monotone(n, u):
    p = SystemParams(n, 50, u)
    assert epsilon(p) <= epsilon(SystemParams(n + 1, 50, u))
    if u > 0:
        assert epsilon(p) < u
    else:
        assert epsilon(p) == 0


def test_schedule_rejects_duplicate_enqueue_argument():
    p = SystemParams(2, 10, 0)
    with pytest.raises(ModelError, match="duplicate Enqueue"):
        schedule(p, [(0, 0, ENQ, 1), (1, 0, ENQ, 1)])


def test_schedule_rejects_chained_first_invocation():
    p = SystemParams(2, 10, 0)
    with pytest.raises(ModelError, match="explicit time"):
        schedule(p, [(0, None, ENQ, 1)])


def test_invocation_argument_rules():
    with pytest.raises(ModelError):
        Invocation(0, 0, ENQ, BOTTOM)
    with pytest.raises(ModelError):
        Invocation(0, 0, DEQ, 3)
    with pytest.raises(ModelError):
        Invocation(0, 0, "peek")


def test_delay_rule_first_match_and_window():
    policy = DelayPolicy(10, (DelayRule(7, {0}, {1}, since=5, until=9), DelayRule(8, {0})))
    assert policy.delay(0, 1, 4) == 8
    assert policy.delay(0, 1, 5) == 7
    assert policy.delay(0, 1, 9) == 8
    assert policy.delay(1, 0, 6) == 10
    with pytest.raises(ModelError):
        DelayRule(-1)


def test_extract_single_enqueue():
    p = SystemParams(2, 10, 0)
    run = simulate(zero_u_multiplicity_queue(), schedule(p, [(0, 0, ENQ, 1)])).run
    h = extract_history(run)
    assert len(h) == 1
    op = h.instances[0]
    assert (op.kind, op.argument, op.invoke_time, op.response_time) == (ENQ, 1, 0, 5)


def test_extract_empty_run():
    p = SystemParams(2, 10, 0)
    run = simulate(zero_u_multiplicity_queue(), schedule(p, [])).run
    assert len(extract_history(run)) == 0


def test_extract_incomplete_operation():
    p = SystemParams(2, 10, 0)
    run = simulate(zero_u_multiplicity_queue(), schedule(p, [(0, 0, DEQ)])).run
    cut = [tuple(e for e in seq if e.kind != "respond") for seq in run.events]
    from multiqueue import Run
    pending = Run(run.params, tuple(cut), run.clock_offsets, run.messages)
    with pytest.raises(ModelError, match="incomplete operation"):
        extract_history(pending)


def test_history_validation():
    p = SystemParams(2, 10, 0)
    with pytest.raises(ModelError, match="distinct"):
        make_history(p, [(0, ENQ, 1, 0, 1), (1, ENQ, 1, 0, 1)])
    with pytest.raises(ModelError, match="overlap"):
        make_history(p, [(0, DEQ, BOTTOM, 0, 5), (0, DEQ, BOTTOM, 3, 8)])
    with pytest.raises(ModelError):
        make_history(p, [(0, DEQ, BOTTOM, 5, 4)])


def test_precedence_strict_across_processes_weak_within():
    a = OperationInstance(0, 0, DEQ, None, BOTTOM, F(0), F(5))
    same = OperationInstance(1, 0, DEQ, None, BOTTOM, F(5), F(10))
    other = OperationInstance(2, 1, DEQ, None, BOTTOM, F(5), F(10))
    assert a.precedes(same)
    assert not a.precedes(other) and a.overlaps(other)


def test_local_view_horizon_and_contents():
    p = SystemParams(2, 10, 0)
    run = simulate(zero_u_multiplicity_queue(), schedule(p, [(0, 3, ENQ, 1)], offsets=(0, 0))).run
    assert local_view(run, 0, until_local=2) == []
    view = local_view(run, 1)
    assert [t for t, _ in view] == [13]
    assert view[0][1][0] == "receive"


def test_local_view_first_difference_is_earlier_receive():
    p = SystemParams(2, 10, 4)
    a = simulate(zero_u_multiplicity_queue(), schedule(p, [(0, 0, ENQ, 1)], delay=10)).run
    b = simulate(zero_u_multiplicity_queue(), schedule(p, [(0, 0, ENQ, 1)], delay=7)).run
    va, vb = local_view(a, 1), local_view(b, 1)
    first = next(i for i, (x, y) in enumerate(zip(va, vb)) if x != y)
    assert min(va[first][0], vb[first][0]) == 7
