"""Typed agent messages and the lenient structured-response parser."""

from __future__ import annotations

import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

ROLES = ("analyst", "scientist", "scientist_feedback", "verifier", "reviewer")

# One schema per role; both scientist templates share the proposal schema.
SCHEMA_IDS = {
    "analyst": "analyst.v1",
    "scientist": "scientist.v1",
    "scientist_feedback": "scientist.v1",
    "verifier": "verifier.v1",
    "reviewer": "reviewer.v1",
}

CONSISTENT = "Consistent"
INCONSISTENT = "Inconsistent"


class UnknownRoleError(ValueError):
    def __init__(self, role: str):
        super().__init__(f"unknown agent role: {role!r} (expected one of {', '.join(ROLES)})")
        self.role = role


class SchemaError(ValueError):
    """A response that cannot be read as the role's message type."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class NoJsonError(SchemaError):
    pass


@dataclass(frozen=True)
class TaskPrompt:
    task_id: str
    description: str
    target_smiles: tuple[str, ...] = ()
    tool_analysis: str = ""


@dataclass(frozen=True)
class AnalystReport:
    category: str
    parsed_smiles: tuple[str, ...] = ()
    tools_to_use: tuple[tuple[str, str], ...] = ()  # (tool_name, purpose)

    def to_dict(self) -> dict[str, Any]:
        return {
            "category": self.category,
            "parsed_smiles": list(self.parsed_smiles),
            "tools_to_use": [{"tool_name": n, "purpose": p} for n, p in self.tools_to_use],
        }


@dataclass(frozen=True)
class ScientistProposal:
    step1: str
    step2: str
    step3: str
    smiles: str

    @property
    def steps(self) -> tuple[str, str, str]:
        return (self.step1, self.step2, self.step3)

    def to_dict(self) -> dict[str, str]:
        return {"step1": self.step1, "step2": self.step2, "step3": self.step3, "smiles": self.smiles}


@dataclass(frozen=True)
class VerifierVerdict:
    step1: str
    step2: str
    step3: str
    consistency: str

    @property
    def consistent(self) -> bool:
        return self.consistency == CONSISTENT

    @property
    def steps(self) -> tuple[str, str, str]:
        return (self.step1, self.step2, self.step3)

    def to_dict(self) -> dict[str, str]:
        return {"step1": self.step1, "step2": self.step2, "step3": self.step3, "consistency": self.consistency}


@dataclass(frozen=True)
class ReviewerFeedback:
    step1: str = ""
    step2: str = ""
    step3: str = ""

    @property
    def steps(self) -> tuple[str, str, str]:
        return (self.step1, self.step2, self.step3)

    def to_dict(self) -> dict[str, str]:
        return {"step1": self.step1, "step2": self.step2, "step3": self.step3}


@dataclass
class ConversationState:
    """Mutable per-campaign state threaded through the protocol."""

    history: list[str] = field(default_factory=list)  # canonical SMILES, in order, no repeats
    last_proposal: ScientistProposal | None = None
    last_verdict: VerifierVerdict | None = None
    last_review: ReviewerFeedback | None = None
    last_score: float | None = None
    last_smiles: str | None = None  # the proposal the feedback refers to
    iteration: int = 0
    verifier_round: int = 0

    def remember(self, canonical: str) -> None:
        if canonical not in self.history:
            self.history.append(canonical)


@dataclass(frozen=True)
class BackendRequest:
    role: str
    prompt: str
    schema_id: str
    tool_catalog: tuple[tuple[str, str], ...] = ()  # (name, description) offered to analysts
    # Structured data for offline backends; never serialized or sent over the wire.
    context: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.role not in SCHEMA_IDS:
            raise UnknownRoleError(self.role)
        if self.schema_id != SCHEMA_IDS[self.role]:
            raise ValueError(f"schema id for {self.role} is {SCHEMA_IDS[self.role]}, got {self.schema_id}")


@dataclass(frozen=True)
class BackendResponse:
    text: str


_FENCE = re.compile(r"```[A-Za-z]*[ \t]*\n?(.*?)```", re.S)


def extract_json(raw: str) -> dict[str, Any]:
    """The outermost JSON object in ``raw``, after stripping code fences and prose."""
    if not raw or not raw.strip():
        raise NoJsonError("empty response")
    fenced = _FENCE.search(raw)
    candidates = [fenced.group(1), raw] if fenced else [raw]
    decoder = json.JSONDecoder()
    for text in candidates:
        pos = text.find("{")
        while pos != -1:
            try:
                obj, _ = decoder.raw_decode(text, pos)
            except json.JSONDecodeError:
                pos = text.find("{", pos + 1)
                continue
            if isinstance(obj, dict):
                return obj
            pos = text.find("{", pos + 1)
    raise NoJsonError("no JSON object found in response")


def _text(obj: Mapping[str, Any], key: str, *, nonempty: bool) -> str:
    if key not in obj:
        raise SchemaError(f"missing required key {key!r}", key)
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(f"key {key!r} must be a string", key)
    if nonempty and not value.strip():
        raise SchemaError(f"key {key!r} is empty", key)
    return value


def _analyst(obj: Mapping[str, Any]) -> AnalystReport:
    smiles: list[str] = []
    raw_smiles = obj.get("parsed_smiles", [])
    if not isinstance(raw_smiles, list):
        raise SchemaError("'parsed_smiles' must be a list", "parsed_smiles")
    for item in raw_smiles:
        s = item.get("smiles") if isinstance(item, dict) else item
        if isinstance(s, str) and s.strip():
            smiles.append(s.strip())
    if "tools_to_use" not in obj:
        raise SchemaError("missing required key 'tools_to_use'", "tools_to_use")
    raw_tools = obj["tools_to_use"]
    if not isinstance(raw_tools, list):
        raise SchemaError("'tools_to_use' must be a list", "tools_to_use")
    tools = []
    for item in raw_tools:
        if not isinstance(item, dict) or not isinstance(item.get("tool_name"), str):
            raise SchemaError("each tools_to_use entry needs a 'tool_name' string", "tool_name")
        purpose = item.get("purpose", "")
        tools.append((item["tool_name"].strip(), purpose if isinstance(purpose, str) else str(purpose)))
    return AnalystReport("", tuple(smiles), tuple(tools))


def parse_structured_response(role: str, raw: str):
    """Parse a raw backend reply into the role's message type.

    Leniency is limited to fence stripping, surrounding prose and the case of
    the consistency literal. Anything else is a SchemaError.
    """
    if role not in SCHEMA_IDS:
        raise UnknownRoleError(role)
    obj = extract_json(raw)
    if role == "analyst":
        return _analyst(obj)
    if role in ("scientist", "scientist_feedback"):
        s1, s2, s3 = (_text(obj, k, nonempty=True) for k in ("step1", "step2", "step3"))
        return ScientistProposal(s1, s2, s3, _text(obj, "smiles", nonempty=True).strip())
    if role == "verifier":
        s1, s2, s3 = (_text(obj, k, nonempty=False) for k in ("step1", "step2", "step3"))
        key = next((k for k in obj if k.casefold() == "consistency"), "consistency")
        literal = _text(obj, key, nonempty=True).strip()
        for allowed in (CONSISTENT, INCONSISTENT):
            if literal.casefold() == allowed.casefold():
                return VerifierVerdict(s1, s2, s3, allowed)
        raise SchemaError(f"consistency must be {CONSISTENT!r} or {INCONSISTENT!r}, got {literal!r}", "consistency")
    s1, s2, s3 = (_text(obj, k, nonempty=False) for k in ("step1", "step2", "step3"))
    return ReviewerFeedback(s1, s2, s3)
