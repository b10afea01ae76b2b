"""Command-line driver.

Exit status: 0 success or legal, 1 illegal, inadmissible or failed run,
2 usage error. Times are integers or rationals written ``p/q``.
"""

from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction

from .algorithms import algorithm_by_name
from .checker import (TIE_ENQUEUE_FIRST, TIE_PID, CheckerError, check_linearizable_fifo,
                      check_multiplicity_setlin, construction4_certificate)
from .model import ModelError, SystemParams, bound_Q, epsilon, extract_history, stagger_s
from .scenarios import (BoundError, ScenarioConfig, build_Dk, build_S3X, build_Sk,
                        build_Sk_prime, make_config, minimal_n, x_constraint_interval)
from .shifting import ShiftError, ShiftVector, is_admissible, shift
from .simulator import SimulationError, simulate
from .trace import (admissibility_record, canonical_json, dumps_run, dumps_schedule,
                    loads_history, loads_run, loads_schedule, trace_kind, verdict_record)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_RATIONAL = re.compile(r"-?\d+(/\d+)?")


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    if not _RATIONAL.fullmatch(text.strip()):
        raise argparse.ArgumentTypeError(f"expected an integer or p/q rational, got {text!r}")
    return Fraction(text.strip())


def rational_list(text: str) -> list:
    return [rational(part) for part in text.split(",") if part.strip()]


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e


def _write(path, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _params(args) -> SystemParams:
    return SystemParams(args.n, args.d, args.u)


def _scenario_schedule(args, behavior):
    params = _params(args)
    cfg = make_config(params, behavior, args.deq, args.t1)
    kind = args.kind
    if kind in ("Dk", "Sk", "Sk-prime") and args.k is None:
        raise UsageError(f"scenario {kind} needs --k")
    if kind == "Dk":
        return build_Dk(cfg, args.k)
    if kind == "Sk":
        return build_Sk(cfg, args.k)
    if kind == "Sk-prime":
        return build_Sk_prime(cfg, args.k)
    x = args.X
    if x is None:
        if args.deq is None:
            raise UsageError("scenario S3X needs --X, or --deq to pick the interval midpoint")
        interval = x_constraint_interval(cfg)
        if interval.empty:
            raise UsageError(f"no admissible X for these parameters (interval {interval})")
        x = interval.midpoint()
    return build_S3X(cfg, x)


def cmd_simulate(args) -> int:
    behavior = algorithm_by_name(args.algo)
    if args.schedule is not None:
        schedule = loads_schedule(_read(args.schedule))
    elif args.kind is not None:
        schedule = _scenario_schedule(args, behavior)
    else:
        raise UsageError("simulate needs --schedule FILE or --kind KIND")
    try:
        outcome = simulate(behavior, schedule)
    except SimulationError as e:
        print(canonical_json({"type": "error", "error": str(e)}))
        return EXIT_FAIL
    _write(args.out, dumps_run(outcome.run))
    return EXIT_OK


def cmd_scenario(args) -> int:
    behavior = algorithm_by_name(args.algo)
    schedule = _scenario_schedule(args, behavior)
    if args.schedule_out:
        _write(args.schedule_out, dumps_schedule(schedule))
    run = simulate(behavior, schedule).run
    _write(args.out, dumps_run(run))
    verdict = is_admissible(run)
    report = admissibility_record(verdict)
    if args.out is None or args.out == "-":
        sys.stderr.write(report)
    else:
        sys.stdout.write(report)
    return EXIT_OK if verdict.admissible else EXIT_FAIL


def cmd_check(args) -> int:
    text = _read(args.trace)
    kind = trace_kind(text)
    run = None
    if kind == "run":
        run = loads_run(text)
        history = extract_history(run)
    elif kind == "history":
        history = loads_history(text)
    else:
        raise UsageError(f"check expects a run or history trace, got {kind!r}")
    try:
        if args.certificate:
            if run is None:
                raise UsageError("--certificate needs a run trace")
            _, verdict = construction4_certificate(run, args.tie_break)
        elif args.mode == "lin":
            verdict = check_linearizable_fifo(history, args.cap)
        else:
            verdict = check_multiplicity_setlin(history, args.cap)
    except CheckerError as e:
        if "grouping collision" in str(e):
            print(canonical_json({"type": "verdict", "legal": False, "witness": None,
                                  "violation": str(e)}))
            return EXIT_FAIL
        raise UsageError(str(e)) from e
    sys.stdout.write(verdict_record(verdict))
    return EXIT_OK if verdict.legal else EXIT_FAIL


def cmd_shift(args) -> int:
    run = loads_run(_read(args.trace))
    vector = ShiftVector.of(run.params.n, args.vector)
    try:
        moved = shift(run, vector)
    except ShiftError as e:
        print(canonical_json({"type": "error", "error": str(e)}))
        return EXIT_FAIL
    _write(args.out, dumps_run(moved))
    return EXIT_OK


def cmd_admissible(args) -> int:
    verdict = is_admissible(loads_run(_read(args.trace)))
    sys.stdout.write(admissibility_record(verdict))
    return EXIT_OK if verdict.admissible else EXIT_FAIL


def cmd_bounds(args) -> int:
    params = _params(args)
    lines = [f"epsilon={epsilon(params)}", f"Q={bound_Q(params)}", f"s={stagger_s(params)}"]
    if args.deq is None:
        lines += ["X_interval=n/a (needs --deq)", "minimal_n=n/a (needs --deq)"]
    else:
        cfg = ScenarioConfig(params, 0, args.deq)
        try:
            interval = x_constraint_interval(cfg)
        except BoundError as e:
            raise UsageError(str(e)) from e
        shown = str(interval)
        if not interval.empty and interval.lower == interval.upper:
            shown += " (degenerate: only X=" + str(interval.lower) + ")"
        lines.append(f"X_interval={shown}")
        try:
            lines.append(f"minimal_n={minimal_n(cfg)}")
        except BoundError as e:
            lines.append(f"minimal_n=undefined ({e})")
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiqueue", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def system(p):
        p.add_argument("--n", type=int, required=True, help="number of processes")
        p.add_argument("--d", type=rational, required=True, help="maximum message delay")
        p.add_argument("--u", type=rational, required=True, help="delay uncertainty")

    def scenario_args(p, required):
        p.add_argument("--kind", choices=["Dk", "Sk", "Sk-prime", "S3X"], required=required)
        p.add_argument("--n", type=int, required=required)
        p.add_argument("--d", type=rational, required=required)
        p.add_argument("--u", type=rational, required=required)
        p.add_argument("--k", type=int)
        p.add_argument("--X", type=rational, help="p_1 shift for S3X")
        p.add_argument("--deq", type=rational, help="assumed |Dequeue| bound")
        p.add_argument("--t1", type=rational, help="override the dequeue-phase start")

    p = sub.add_parser("simulate", help="run an algorithm on a schedule and write the run trace")
    p.add_argument("--algo", default="zero-u", help="zero-u, zero-u-verbatim, baseline or strawman:T")
    p.add_argument("--schedule", help="schedule JSON file ('-' for stdin)")
    scenario_args(p, required=False)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenario", help="build and simulate a lower-bound construction")
    scenario_args(p, required=True)
    p.add_argument("--algo", default="baseline")
    p.add_argument("--out", help="run trace file (default stdout; report then goes to stderr)")
    p.add_argument("--schedule-out", help="also write the schedule JSON here")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("check", help="check a run or history trace")
    p.add_argument("trace")
    p.add_argument("--mode", choices=["setlin", "lin"], default="setlin")
    p.add_argument("--cap", type=int, default=12, help="instance cap for the search")
    p.add_argument("--certificate", action="store_true",
                   help="validate the timestamp certificate of a zero-u run instead")
    p.add_argument("--tie-break", choices=[TIE_PID, TIE_ENQUEUE_FIRST], default=TIE_PID)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("shift", help="shift a run trace by a per-process vector")
    p.add_argument("trace")
    p.add_argument("--vector", type=rational_list, required=True, help="comma-separated, e.g. 0,-1/2,0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("admissible", help="report admissibility of a run trace")
    p.add_argument("trace")
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("bounds", help="print epsilon, Q, s, the X interval and minimal n")
    system(p)
    p.add_argument("--deq", type=rational, help="assumed |Dequeue| bound")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ModelError, ValueError) as e:
        print(f"multiqueue {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
