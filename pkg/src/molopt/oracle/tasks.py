"""Task specifications for the 23 benchmark oracles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cache
from importlib import resources
from typing import Any

from molopt.oracle.modifiers import ScoreModifier


class Family(str, Enum):
    REDISCOVERY = "rediscovery"
    SIMILARITY = "similarity"
    ISOMER = "isomer"
    MPO = "mpo"
    QED = "qed"
    SMARTS_CONSTRAINT = "smarts_constraint"
    EXTERNAL_MODEL = "external_model"


MEASURES = frozenset({"similarity", "isomer", "tpsa", "logp", "num_rings", "num_aromatic_rings", "num_fluorine", "qed"})


class UnknownTaskError(KeyError):
    def __init__(self, task_id: str):
        super().__init__(task_id)
        self.task_id = task_id

    def __str__(self) -> str:
        return f"unknown task: {self.task_id!r}"


@dataclass(frozen=True)
class Component:
    measure: str
    modifier: ScoreModifier = ScoreModifier()
    weight: float = 1.0
    target: str | None = None  # SMILES for similarity
    formula: str | None = None  # for isomer

    def __post_init__(self) -> None:
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure: {self.measure}")
        if self.measure == "similarity" and not self.target:
            raise ValueError("similarity component needs a target")
        if self.measure == "isomer" and not self.formula:
            raise ValueError("isomer component needs a formula")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Component:
        return cls(
            measure=d["measure"],
            modifier=ScoreModifier.from_dict(d.get("modifier", {})),
            weight=float(d.get("weight", 1.0)),
            target=d.get("target"),
            formula=d.get("formula"),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"measure": self.measure, "modifier": self.modifier.to_dict(), "weight": self.weight}
        if self.target:
            out["target"] = self.target
        if self.formula:
            out["formula"] = self.formula
        return out


@dataclass(frozen=True)
class OracleSpec:
    task_id: str
    family: Family
    description: str
    targets: tuple[str, ...] = ()
    components: tuple[Component, ...] = ()
    required: tuple[str, ...] = ()
    forbidden: tuple[str, ...] = ()
    similarity_cap: float | None = None
    formula: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> OracleSpec:
        return cls(
            task_id=d["task_id"],
            family=Family(d["family"]),
            description=d["description"],
            targets=tuple(d.get("targets", ())),
            components=tuple(Component.from_dict(c) for c in d.get("components", ())),
            required=tuple(d.get("required", ())),
            forbidden=tuple(d.get("forbidden", ())),
            similarity_cap=d.get("similarity_cap"),
            formula=d.get("formula"),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "task_id": self.task_id,
            "family": self.family.value,
            "description": self.description,
            "targets": list(self.targets),
            "components": [c.to_dict() for c in self.components],
        }
        if self.required:
            out["required"] = list(self.required)
        if self.forbidden:
            out["forbidden"] = list(self.forbidden)
        if self.similarity_cap is not None:
            out["similarity_cap"] = self.similarity_cap
        if self.formula:
            out["formula"] = self.formula
        return out

    def with_gaussian(self, measure: str, mu: float | None = None, sigma: float | None = None) -> OracleSpec:
        """Copy with one gaussian component re-parameterised (config overrides)."""
        comps = []
        for c in self.components:
            if c.measure == measure and c.modifier.kind == "gaussian":
                m0, s0 = c.modifier.params
                c = replace(c, modifier=ScoreModifier("gaussian", (m0 if mu is None else mu, s0 if sigma is None else sigma)))
            comps.append(c)
        return replace(self, components=tuple(comps))


@cache
def load_tasks() -> dict[str, OracleSpec]:
    raw = json.loads(resources.files("molopt.oracle").joinpath("data").joinpath("tasks.json").read_text(encoding="utf-8"))
    specs = [OracleSpec.from_dict(t) for t in raw["tasks"]]
    return {s.task_id: s for s in specs}


def get_task(task_id: str) -> OracleSpec:
    try:
        return load_tasks()[task_id]
    except KeyError:
        raise UnknownTaskError(task_id) from None


def task_ids() -> list[str]:
    return list(load_tasks())
