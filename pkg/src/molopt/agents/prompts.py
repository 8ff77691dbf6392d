"""Prompt templates (shipped as text files) and their renderer.

Placeholders are the square-bracket names printed in the templates, for
example ``[task description]``. Substitution is a single pass, so text in a
value that looks like a placeholder is never expanded.
"""

from __future__ import annotations

import hashlib
import re
from collections.abc import Mapping
from functools import cache
from importlib import resources
from typing import Any

from molopt.agents.messages import ROLES, UnknownRoleError

CATEGORIES = ("structural", "electronic_topological", "fragment", "identifier", "misc")

CATEGORY_NAMES = {
    "structural": "structural descriptors",
    "electronic_topological": "electronic and topological descriptors",
    "fragment": "functional groups and fragments",
    "identifier": "molecular identifiers",
    "misc": "miscellaneous molecular properties",
}

PLACEHOLDERS: dict[str, tuple[str, ...]] = {
    "analyst": ("category name", "task name", "task description"),
    "scientist": ("task description", "result of tool analysis", "top100 SMLIES"),
    "scientist_feedback": (
        "smiles_history",
        "verifier/reviewer",
        "task description",
        "target functional groups",
        "topk smiles",
        "previous smiles",
        "score",
        "functional groups",
        "scientist step1 reasoning",
        "verifier/reviewer step1 feedback",
        "scientist step2 think",
        "verifier/reviewer step2 feedback",
        "verifier/scientist step3 think",
        "verifier/reviewer step3 feedback",
    ),
    "verifier": (
        "task description",
        "target functional groups",
        "thinking['step1']",
        "thinking['step2']",
        "thinking['step3']",
        "smiles",
        "functional groups",
    ),
    "reviewer": (
        "task description",
        "scientist step1 reasoning",
        "scientist step2 reasoning",
        "scientist step3 reasoning",
        "scientist proposed SMILES",
        "score",
        "functional groups",
    ),
}

# The no-repeat block opens the feedback template. It is dropped when the
# history is empty and prepended to the plain scientist prompt when not.
REPEAT_BLOCK = "YOU MUST NOT REPEAT ANY OF THE PREVIOUSLY GENERATED SMILES:\n[smiles_history]\n"
OPTIONAL = {"scientist": ("smiles_history",), "scientist_feedback": ("smiles_history",)}


class MissingPlaceholderError(KeyError):
    def __init__(self, role: str, names: list[str]):
        super().__init__(names[0])
        self.role = role
        self.names = names

    def __str__(self) -> str:
        return f"{self.role} prompt needs context for: {', '.join('[' + n + ']' for n in self.names)}"


def template_name(role: str, category: str | None = None) -> str:
    if role not in ROLES:
        raise UnknownRoleError(role)
    if role == "analyst":
        if category not in CATEGORIES:
            raise ValueError(f"analyst prompt needs a category, one of {', '.join(CATEGORIES)}")
        return f"analyst_{category}.txt"
    return f"{role}.txt"


@cache
def load_template(name: str) -> str:
    return resources.files("molopt.agents").joinpath("templates").joinpath(name).read_text(encoding="utf-8")


def template_files() -> list[str]:
    return [f"analyst_{c}.txt" for c in CATEGORIES] + [f"{r}.txt" for r in ROLES if r != "analyst"]


def template_hashes() -> dict[str, str]:
    """sha256 of every shipped template, recorded in trace headers."""
    return {n: hashlib.sha256(load_template(n).encode("utf-8")).hexdigest() for n in template_files()}


def _substitute(text: str, values: Mapping[str, str]) -> str:
    if not values:
        return text
    pattern = re.compile("|".join(re.escape(f"[{k}]") for k in sorted(values, key=len, reverse=True)))
    return pattern.sub(lambda m: values[m.group(0)[1:-1]], text)


def render_prompt(role: str, context: Mapping[str, Any]) -> str:
    """Fill the role's template from ``context`` (placeholder name -> value).

    Analyst prompts pick their template from ``context["category"]``; the
    ``category name`` placeholder defaults to that category's display name.
    """
    ctx = dict(context)
    template = load_template(template_name(role, ctx.get("category")))
    if role == "analyst":
        ctx.setdefault("category name", CATEGORY_NAMES[ctx["category"]])
    history = str(ctx.get("smiles_history") or "")
    if role == "scientist" and history:
        template = REPEAT_BLOCK + template
    elif role == "scientist_feedback" and not history and template.startswith(REPEAT_BLOCK):
        template = template[len(REPEAT_BLOCK):]
    names = PLACEHOLDERS[role] + tuple(n for n in OPTIONAL.get(role, ()) if n not in PLACEHOLDERS[role])
    needed = [n for n in names if f"[{n}]" in template]
    missing = [n for n in needed if n not in ctx and n not in OPTIONAL.get(role, ())]
    if missing:
        raise MissingPlaceholderError(role, missing)
    return _substitute(template, {n: str(ctx.get(n, "")) for n in needed})
