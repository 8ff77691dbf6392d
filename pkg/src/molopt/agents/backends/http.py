"""Chat-completion client for OpenAI-compatible endpoints."""

from __future__ import annotations

import os
import time
from typing import Any

import httpx

from molopt.agents.backends import BackendError
from molopt.agents.messages import BackendRequest, BackendResponse

ENV_KEY = "MOLOPT_API_KEY"
ENV_BASE = "MOLOPT_API_BASE"
ENV_MODEL = "MOLOPT_MODEL"
DEFAULT_BASE = "https://api.openai.com/v1"

_RETRY_STATUS = {408, 409, 429, 500, 502, 503, 504}


def catalog_message(catalog: tuple[tuple[str, str], ...]) -> str:
    lines = ["Tools available in this category (name: description):"]
    lines += [f"- {name}: {desc}" for name, desc in catalog]
    return "\n".join(lines)


class HttpBackend:
    """POSTs ``{base}/chat/completions`` with the rendered prompt as the user turn.

    Analyst requests carry the category's tool catalog as a system message.
    Transient failures (timeouts, 429, 5xx) are retried with exponential
    backoff; anything else raises BackendError at once. One instance may be
    shared by concurrent campaigns since the underlying client is thread-safe.
    """

    name = "http"

    def __init__(
        self,
        model: str,
        api_key: str,
        base_url: str = DEFAULT_BASE,
        temperature: float | None = None,
        timeout: float = 120.0,
        max_retries: int = 4,
        backoff: float = 2.0,
        json_mode: bool = False,
        transport: httpx.BaseTransport | None = None,
    ):
        self.model = model
        self.base_url = base_url.rstrip("/")
        self.temperature = temperature
        self.max_retries = max_retries
        self.backoff = backoff
        self.json_mode = json_mode
        self._client = httpx.Client(
            timeout=timeout,
            headers={"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"},
            transport=transport,
        )

    @classmethod
    def from_env(cls, **options: Any) -> HttpBackend:
        key = os.environ.get(ENV_KEY)
        model = options.pop("model", None) or os.environ.get(ENV_MODEL)
        if not key:
            raise BackendError(f"set {ENV_KEY} to use the http backend")
        if not model:
            raise BackendError(f"set {ENV_MODEL} (or pass a model name) to use the http backend")
        base = options.pop("base_url", None) or os.environ.get(ENV_BASE, DEFAULT_BASE)
        return cls(model=model, api_key=key, base_url=base, **options)

    def body(self, request: BackendRequest) -> dict[str, Any]:
        messages = []
        if request.tool_catalog:
            messages.append({"role": "system", "content": catalog_message(request.tool_catalog)})
        messages.append({"role": "user", "content": request.prompt})
        body: dict[str, Any] = {"model": self.model, "messages": messages}
        if self.temperature is not None:
            body["temperature"] = self.temperature
        if self.json_mode:
            body["response_format"] = {"type": "json_object"}
        return body

    def complete(self, request: BackendRequest) -> BackendResponse:
        url = f"{self.base_url}/chat/completions"
        body = self.body(request)
        last = ""
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(url, json=body)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code in _RETRY_STATUS:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise BackendError(f"HTTP {resp.status_code} from {url}: {resp.text[:300]}")
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed chat-completion response: {exc}") from exc
            return BackendResponse(content or "")
        raise BackendError(f"giving up after {self.max_retries + 1} attempts: {last}")

    def close(self) -> None:
        self._client.close()
