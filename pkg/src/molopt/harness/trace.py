"""Run traces: a header plus an append-only list of event records, stored as JSONL."""

from __future__ import annotations

import json
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

TRACE_FORMAT = "molopt-trace-1"


class TraceError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class RunTrace:
    header: dict[str, Any] = field(default_factory=dict)
    events: list[dict[str, Any]] = field(default_factory=list)

    def append(self, kind: str, **fields: Any) -> dict[str, Any]:
        event = {"seq": len(self.events), "type": kind, **fields}
        self.events.append(event)
        return event

    def of_type(self, *kinds: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e["type"] in kinds]

    def oracle_calls(self) -> list[dict[str, Any]]:
        """Budget-consuming oracle evaluations, in order."""
        return [e for e in self.events if e["type"] == "oracle" and e.get("consumed_call")]

    def scores(self) -> list[float]:
        return [e["score"] for e in self.oracle_calls()]

    def lines(self) -> Iterator[str]:
        yield _dump({"format": TRACE_FORMAT, **self.header})
        for e in self.events:
            yield _dump(e)

    def to_jsonl(self) -> str:
        return "".join(line + "\n" for line in self.lines())


def _clean(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise TraceError(f"non-finite number in trace: {obj}")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump(obj: dict[str, Any]) -> str:
    return json.dumps(_clean(obj), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def persist_trace(trace: RunTrace, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trace.to_jsonl(), encoding="utf-8")
    return path


def parse_trace(text: str) -> RunTrace:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    elif lines:
        # No trailing newline: the last record may have been cut off mid-write.
        try:
            json.loads(lines[-1])
        except json.JSONDecodeError:
            raise TraceError("truncated final record", len(lines)) from None
    if not lines:
        raise TraceError("empty trace file")
    records = []
    for n, line in enumerate(lines, 1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"malformed JSON ({exc.msg})", n) from None
        if not isinstance(obj, dict):
            raise TraceError("record is not a JSON object", n)
        records.append(obj)
    header = records[0]
    if header.pop("format", None) != TRACE_FORMAT:
        raise TraceError(f"not a {TRACE_FORMAT} header", 1)
    for n, e in enumerate(records[1:], 2):
        if "type" not in e or e.get("seq") != n - 2:
            raise TraceError("event out of order or missing 'type'", n)
    return RunTrace(header, records[1:])


def load_trace(path: str | Path) -> RunTrace:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TraceError(f"cannot read {path}: {exc}") from exc
    return parse_trace(text)
