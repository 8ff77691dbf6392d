"""Scripted backend: replies are looked up by (role, call ordinal).

Fixture format (JSON object)::

    {
      "analyst":   [<reply>, ...],
      "scientist": [<reply>, ...],
      "scientist_feedback": [<reply>, ...],
      "verifier":  [<reply>, ...],
      "reviewer":  [<reply>, ...],
      "exhausted": "repeat_last"
    }

The n-th request for a role (counting from 0) gets the n-th reply of that
role's list. A reply is either a string, sent back verbatim (so malformed
JSON can be scripted), a JSON object, serialized with sorted keys, or
``{"__error__": "message"}``, which raises BackendError. If
``scientist_feedback`` is absent, feedback-template requests draw from the
``scientist`` list and share its counter. Past the end of a list,
``exhausted`` decides: ``repeat_last`` (default), ``cycle``, or ``error``.
"""

from __future__ import annotations

import json
import threading
from collections import Counter
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from molopt.agents.backends import BackendError
from molopt.agents.messages import BackendRequest, BackendResponse

Reply = str | Mapping[str, Any]


class MockBackend:
    name = "mock"

    def __init__(self, script: Mapping[str, Sequence[Reply]], exhausted: str = "repeat_last"):
        exhausted = script.get("exhausted", exhausted)
        if exhausted not in ("repeat_last", "cycle", "error"):
            raise ValueError(f"unknown exhaustion policy: {exhausted}")
        self.exhausted = exhausted
        self.script = {role: list(replies) for role, replies in script.items() if role != "exhausted"}
        self.calls: Counter[str] = Counter()
        self.log: list[tuple[str, int]] = []
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path, **options: Any) -> MockBackend:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BackendError(f"cannot read mock script {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise BackendError(f"mock script {path} must be a JSON object")
        return cls(data, **options)

    def _key(self, role: str) -> str:
        if role == "scientist_feedback" and role not in self.script:
            return "scientist"
        return role

    def complete(self, request: BackendRequest) -> BackendResponse:
        key = self._key(request.role)
        with self._lock:
            n = self.calls[key]
            self.calls[key] += 1
            self.log.append((key, n))
        replies = self.script.get(key)
        if not replies:
            raise BackendError(f"mock script has no replies for role {key!r}")
        if n >= len(replies):
            if self.exhausted == "error":
                raise BackendError(f"mock script for {key!r} exhausted after {len(replies)} replies")
            n = n % len(replies) if self.exhausted == "cycle" else len(replies) - 1
        reply = replies[n]
        if isinstance(reply, Mapping):
            if "__error__" in reply:
                raise BackendError(str(reply["__error__"]))
            return BackendResponse(json.dumps(reply, sort_keys=True, ensure_ascii=False))
        return BackendResponse(str(reply))
