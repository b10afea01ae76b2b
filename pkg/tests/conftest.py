from fractions import Fraction as F

import pytest

from multiqueue import DEQ, ENQ, DelayPolicy, Invocation, Schedule, SystemParams


def schedule(params, rows, offsets=None, delay=None, rules=()):
    """Rows are (process, time, op[, arg]); time None chains."""
    invs = [Invocation(r[0], r[1], r[2], r[3] if len(r) > 3 else None) for r in rows]
    offsets = offsets if offsets is not None else (0,) * params.n
    policy = DelayPolicy(params.d if delay is None else delay, tuple(rules))
    return Schedule(params, invs, offsets, policy)


@pytest.fixture
def p3():
    return SystemParams(3, 10, 0)


@pytest.fixture
def concurrent_deqs(p3):
    """Enq(1), Enq(2) at p0, then two Dequeues at t=20 on p1 and p2."""
    return schedule(p3, [(0, 0, ENQ, 1), (0, None, ENQ, 2), (1, 20, DEQ), (2, 20, DEQ)])


__all__ = ["F", "schedule"]


# One PASS/FAIL line per acceptance criterion, printed at the end of the run.
_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE[report.nodeid] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (verdict, detail) in _ACCEPTANCE.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{verdict} {name}" + (f": {detail}" if detail else ""))
