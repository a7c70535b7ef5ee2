"""Model client contract and the live HTTP implementation.

The live client speaks the generic chat-completions wire format; endpoint,
key, and model names come from config/environment, never from code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import httpx

from ..config import LiveModelSettings


class ClientUnavailable(RuntimeError):
    """Network failure or non-success response from the live endpoint."""


@dataclass
class ModelParams:
    temperature: float = 1.3
    top_p: float = 0.8
    model_name: str = "gpt-4o-mini"

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")


@runtime_checkable
class ModelClient(Protocol):
    def complete(self, prompt: str, params: ModelParams) -> str: ...


class HttpChatClient:
    """Chat-completions client; one request per completion, caller-side
    serialization per user is handled by the orchestrator."""

    def __init__(self, settings: LiveModelSettings | None = None,
                 timeout_s: float = 60.0, transport: httpx.BaseTransport | None = None):
        self.settings = settings or LiveModelSettings()
        endpoint = self.settings.resolve_endpoint()
        if not endpoint:
            raise ClientUnavailable(
                "no live endpoint configured; set "
                f"{self.settings.endpoint_env} or config live_model.endpoint")
        self._endpoint = endpoint.rstrip("/")
        self._client = httpx.Client(timeout=timeout_s, transport=transport)

    def complete(self, prompt: str, params: ModelParams) -> str:
        headers = {}
        api_key = self.settings.resolve_api_key()
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": params.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "top_p": params.top_p,
        }
        try:
            response = self._client.post(
                f"{self._endpoint}/chat/completions", json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise ClientUnavailable(str(exc)) from exc
        if response.status_code != 200:
            raise ClientUnavailable(
                f"endpoint returned {response.status_code}: {response.text[:200]}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ClientUnavailable(f"unexpected response shape: {exc}") from exc

    def close(self) -> None:
        self._client.close()
