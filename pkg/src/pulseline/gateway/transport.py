"""Pluggable outbound transports.

The store is the source of truth for ordering and content; a transport only
moves bytes. Loopback keeps an in-memory record (what the UI polls and the
tests inspect); the JSONL transport demonstrates that swapping transports
never changes envelope content. A real chat-platform adapter would slot in
behind the same `send`.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Protocol, runtime_checkable

from ..envelopes import ChatEnvelope, TransportUnavailable

__all__ = ["Transport", "LoopbackTransport", "JsonlTransport",
           "FlakyTransport", "TransportUnavailable"]


@runtime_checkable
class Transport(Protocol):
    def send(self, envelope: ChatEnvelope) -> None: ...


class LoopbackTransport:
    """Records envelopes in delivery order; never fails."""

    def __init__(self):
        self.sent: list[ChatEnvelope] = []
        self._lock = threading.Lock()

    def send(self, envelope: ChatEnvelope) -> None:
        with self._lock:
            self.sent.append(envelope)

    def for_user(self, phone: str) -> list[ChatEnvelope]:
        with self._lock:
            return [e for e in self.sent if e.user_phone == phone]


class JsonlTransport:
    """Appends one JSON line per delivered envelope."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def send(self, envelope: ChatEnvelope) -> None:
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(envelope.to_json_dict()) + "\n")

    def sent(self) -> list[ChatEnvelope]:
        if not self.path.exists():
            return []
        return [ChatEnvelope.from_json_dict(json.loads(line))
                for line in self.path.read_text(encoding="utf-8").splitlines()
                if line.strip()]


class FlakyTransport:
    """Fails the first `failures` sends; used to exercise retry ordering."""

    def __init__(self, failures: int):
        self.failures = failures
        self.attempts = 0
        self.inner = LoopbackTransport()

    def send(self, envelope: ChatEnvelope) -> None:
        self.attempts += 1
        if self.attempts <= self.failures:
            raise TransportUnavailable(f"induced failure {self.attempts}")
        self.inner.send(envelope)
