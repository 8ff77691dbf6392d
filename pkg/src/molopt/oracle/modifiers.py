"""Score modifiers: maps from a raw property value onto [0, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any


def gaussian_modifier(x: float, mu: float, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return math.exp(-((x - mu) ** 2) / (2 * sigma**2))


def clipped_linear(x: float, lo: float, hi: float) -> float:
    """0 at or below ``lo``, 1 at or above ``hi``, linear in between."""
    if hi <= lo:
        raise ValueError("clipped_linear needs hi > lo")
    return min(1.0, max(0.0, (x - lo) / (hi - lo)))


_ARITY = {"identity": 0, "gaussian": 2, "clipped_linear": 2, "threshold": 1}


@dataclass(frozen=True)
class ScoreModifier:
    """identity, gaussian(mu, sigma), clipped_linear(lo, hi) or threshold(t).

    threshold is a step: 1.0 at or above t, else 0.0. Identity clips its
    input to [0, 1] so every modifier stays in range.
    """

    kind: str = "identity"
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _ARITY:
            raise ValueError(f"unknown modifier kind: {self.kind}")
        if len(self.params) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} parameters")
        if self.kind == "gaussian" and self.params[1] <= 0:
            raise ValueError("sigma must be positive")
        if self.kind == "clipped_linear" and self.params[1] <= self.params[0]:
            raise ValueError("clipped_linear needs hi > lo")

    def __call__(self, x: float) -> float:
        if self.kind == "gaussian":
            return gaussian_modifier(x, *self.params)
        if self.kind == "clipped_linear":
            return clipped_linear(x, *self.params)
        if self.kind == "threshold":
            return 1.0 if x >= self.params[0] else 0.0
        return min(1.0, max(0.0, x))

    @property
    def maximum(self) -> float:
        return 1.0

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ScoreModifier:
        kind = d.get("kind", "identity")
        names = {"gaussian": ("mu", "sigma"), "clipped_linear": ("lo", "hi"), "threshold": ("t",)}.get(kind, ())
        return cls(kind, tuple(float(d[n]) for n in names))

    def to_dict(self) -> dict[str, Any]:
        names = {"gaussian": ("mu", "sigma"), "clipped_linear": ("lo", "hi"), "threshold": ("t",)}.get(self.kind, ())
        return {"kind": self.kind, **dict(zip(names, self.params))}
