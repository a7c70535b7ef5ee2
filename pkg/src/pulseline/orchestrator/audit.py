"""Line-delimited JSON audit log."""

from __future__ import annotations

import json
import threading
from pathlib import Path


class AuditLog:
    """Append-only event log; optionally mirrored to a .jsonl file."""

    def __init__(self, path: str | Path | None = None,
                 clock=None):
        import time
        self.path = Path(path) if path is not None else None
        self.clock = clock or time.time
        self._lock = threading.Lock()
        self._entries: list[dict] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.path.exists():
                for line in self.path.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        self._entries.append(json.loads(line))

    def append(self, kind: str, user: str = "", **detail) -> dict:
        entry = {"ts": self.clock(), "kind": kind, "user": user,
                 "detail": detail}
        with self._lock:
            self._entries.append(entry)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry) + "\n")
        return entry

    def entries(self, kind: str | None = None,
                user: str | None = None) -> list[dict]:
        with self._lock:
            snapshot = list(self._entries)
        return [e for e in snapshot
                if (kind is None or e["kind"] == kind)
                and (user is None or e["user"] == user)]
