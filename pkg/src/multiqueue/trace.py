"""Line-delimited JSON trace format for runs, histories, schedules and verdicts.

Every time is written as ``{"den": q, "num": p}`` in lowest terms, keys are
sorted and separators are compact, so ``dumps(loads(text)) == text``.
Payload tuples become JSON arrays and come back as tuples.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .model import (BOTTOM, DelayPolicy, DelayRule, EventRecord, History, Invocation,
                    MessageRecord, ModelError, OperationInstance, Run, Schedule,
                    SystemParams, as_time)

FORMAT_VERSION = 1


def encode_value(v: Any) -> Any:
    if v is BOTTOM:
        return {"bottom": True}
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, Fraction):
        return {"den": v.denominator, "num": v.numerator}
    if isinstance(v, (tuple, list)):
        return [encode_value(x) for x in v]
    if isinstance(v, frozenset):
        return {"set": sorted((encode_value(x) for x in v), key=canonical_json)}
    raise TypeError(f"cannot encode {type(v).__name__} in a trace")


def decode_value(v: Any) -> Any:
    if isinstance(v, list):
        return tuple(decode_value(x) for x in v)
    if isinstance(v, dict):
        if v == {"bottom": True}:
            return BOTTOM
        if set(v) == {"num", "den"}:
            return Fraction(v["num"], v["den"])
        if set(v) == {"set"}:
            return frozenset(decode_value(x) for x in v["set"])
        raise ModelError(f"unrecognised trace value {v!r}")
    return v


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _t(v):
    return None if v is None else encode_value(as_time(v))


def _header(kind: str, params: SystemParams, offsets=None) -> dict:
    rec = {"type": "header", "kind": kind, "version": FORMAT_VERSION,
           "n": params.n, "d": _t(params.d), "u": _t(params.u)}
    if offsets is not None:
        rec["clock_offsets"] = [_t(c) for c in offsets]
    return rec


def _params(rec: dict) -> SystemParams:
    return SystemParams(int(rec["n"]), as_time(rec["d"]), as_time(rec["u"]))


def _event_rec(ev: EventRecord) -> dict:
    return {"type": "event", "process": ev.process, "real_time": _t(ev.real_time),
            "local_time": _t(ev.local_time), "kind": ev.kind, "op": ev.op,
            "value": encode_value(ev.value), "payload": encode_value(ev.payload),
            "peer": ev.peer, "seq": ev.seq, "duration": _t(ev.duration)}


def _message_rec(m: MessageRecord) -> dict:
    return {"type": "message", "sender": m.sender, "receiver": m.receiver,
            "send_time": _t(m.send_time), "receive_time": _t(m.receive_time),
            "payload": encode_value(m.payload), "sequence": m.sequence}


def dumps_run(run: Run) -> str:
    lines = [canonical_json(_header("run", run.params, run.clock_offsets))]
    for seq in run.events:
        lines.extend(canonical_json(_event_rec(ev)) for ev in seq)
    lines.extend(canonical_json(_message_rec(m)) for m in run.messages)
    return "\n".join(lines) + "\n"


def _records(text: str) -> list:
    recs = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not recs or recs[0].get("type") != "header":
        raise ModelError("trace must start with a header record")
    return recs


def trace_kind(text: str) -> str:
    return _records(text)[0]["kind"]


def loads_run(text: str) -> Run:
    recs = _records(text)
    head = recs[0]
    if head["kind"] != "run":
        raise ModelError(f"expected a run trace, got {head['kind']!r}")
    params = _params(head)
    events = [[] for _ in range(params.n)]
    messages = []
    for r in recs[1:]:
        if r["type"] == "event":
            dur = r.get("duration")
            events[r["process"]].append(EventRecord(
                r["process"], as_time(r["real_time"]), as_time(r["local_time"]), r["kind"],
                r.get("op"), decode_value(r.get("value")), decode_value(r.get("payload")),
                r.get("peer"), r.get("seq"), None if dur is None else as_time(dur)))
        elif r["type"] == "message":
            messages.append(MessageRecord(r["sender"], r["receiver"], as_time(r["send_time"]),
                                          as_time(r["receive_time"]), decode_value(r["payload"]),
                                          r["sequence"]))
        else:
            raise ModelError(f"unexpected record type {r['type']!r} in run trace")
    offsets = tuple(as_time(c) for c in head["clock_offsets"])
    return Run(params, tuple(tuple(e) for e in events), offsets, tuple(messages))


def dumps_history(history: History) -> str:
    lines = [canonical_json(_header("history", history.params))]
    for op in history.instances:
        lines.append(canonical_json({
            "type": "instance", "instance_id": op.instance_id, "process": op.process,
            "kind": op.kind, "argument": encode_value(op.argument),
            "return_value": encode_value(op.return_value),
            "invoke_time": _t(op.invoke_time), "response_time": _t(op.response_time)}))
    return "\n".join(lines) + "\n"


def loads_history(text: str) -> History:
    recs = _records(text)
    if recs[0]["kind"] != "history":
        raise ModelError(f"expected a history trace, got {recs[0]['kind']!r}")
    ops = []
    for r in recs[1:]:
        if r["type"] != "instance":
            raise ModelError(f"unexpected record type {r['type']!r} in history trace")
        ops.append(OperationInstance(r["instance_id"], r["process"], r["kind"],
                                     decode_value(r["argument"]), decode_value(r["return_value"]),
                                     as_time(r["invoke_time"]), as_time(r["response_time"])))
    return History(_params(recs[0]), tuple(ops))


def verdict_record(verdict) -> str:
    witness = None
    if verdict.witness is not None:
        witness = [sorted(s) for s in verdict.witness.sequence]
    return canonical_json({"type": "verdict", "legal": verdict.legal, "witness": witness,
                   "violation": verdict.violation}) + "\n"


def admissibility_record(verdict) -> str:
    return canonical_json({"type": "admissibility", "admissible": verdict.admissible,
                   "violations": [{"kind": v.kind, "detail": list(v.detail), "amount": _t(v.amount)}
                                  for v in verdict.violations]}) + "\n"


# Schedules are a single JSON document rather than a line stream.

def schedule_to_dict(s: Schedule) -> dict:
    def rule(r: DelayRule):
        return {"delay": _t(r.delay),
                "senders": None if r.senders is None else sorted(r.senders),
                "receivers": None if r.receivers is None else sorted(r.receivers),
                "since": _t(r.since), "until": _t(r.until)}
    return {
        "type": "schedule", "version": FORMAT_VERSION,
        "n": s.params.n, "d": _t(s.params.d), "u": _t(s.params.u),
        "clock_offsets": [_t(c) for c in s.clock_offsets],
        "invocations": [{"process": i.process, "time": _t(i.time), "op": i.op,
                         "arg": encode_value(i.arg)} for i in s.invocations],
        "delay_policy": {"default": _t(s.delay_policy.default_delay),
                         "rules": [rule(r) for r in s.delay_policy.rules]},
        "notes": list(s.notes),
    }


def dumps_schedule(s: Schedule) -> str:
    return canonical_json(schedule_to_dict(s)) + "\n"


def loads_schedule(text: str) -> Schedule:
    """Parse a schedule document. Times may be ``{num, den}``, ints or "p/q"."""
    doc = json.loads(text)
    params = _params(doc)

    def opt(v):
        return None if v is None else as_time(v)

    pol = doc.get("delay_policy") or {"default": params.d}
    rules = tuple(DelayRule(as_time(r["delay"]),
                            None if r.get("senders") is None else frozenset(r["senders"]),
                            None if r.get("receivers") is None else frozenset(r["receivers"]),
                            opt(r.get("since")), opt(r.get("until")))
                  for r in pol.get("rules", ()))
    invs = tuple(Invocation(i["process"], opt(i.get("time")), i["op"], decode_value(i.get("arg")))
                 for i in doc.get("invocations", ()))
    offsets = doc.get("clock_offsets") or [0] * params.n
    return Schedule(params, invs, tuple(as_time(c) for c in offsets),
                    DelayPolicy(as_time(pol["default"]), rules), tuple(doc.get("notes", ())))
