"""Text-model backends: anything with ``complete(BackendRequest) -> BackendResponse``."""

from __future__ import annotations

from typing import Any, Protocol

from molopt.agents.messages import BackendRequest, BackendResponse


class BackendError(RuntimeError):
    """The backend could not produce a reply (network, auth, scripted failure)."""


class Backend(Protocol):
    name: str

    def complete(self, request: BackendRequest) -> BackendResponse: ...


def create_backend(kind: str, **options: Any) -> Backend:
    """Build a backend by name: ``http``, ``mock`` or ``heuristic``."""
    if kind == "http":
        from molopt.agents.backends.http import HttpBackend

        return HttpBackend.from_env(**options)
    if kind == "mock":
        from molopt.agents.backends.mock import MockBackend

        path = options.pop("script", None)
        if path is None:
            raise ValueError("the mock backend needs a script fixture")
        return MockBackend.from_file(path, **options)
    if kind == "heuristic":
        from molopt.agents.backends.heuristic import HeuristicBackend

        return HeuristicBackend(**options)
    raise ValueError(f"unknown backend: {kind!r} (expected http, mock or heuristic)")


__all__ = ["Backend", "BackendError", "create_backend"]
