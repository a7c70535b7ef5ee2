"""Disk-backed media store keyed by unguessable opaque ids."""

from __future__ import annotations

import json
import re
import secrets
from pathlib import Path

_SAFE_ID = re.compile(r"^[A-Za-z0-9_-]+$")


class MediaNotFound(KeyError):
    pass


class MediaStore:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes, mime: str) -> str:
        media_id = secrets.token_urlsafe(16)
        (self.directory / f"{media_id}.bin").write_bytes(data)
        (self.directory / f"{media_id}.meta").write_text(
            json.dumps({"mime": mime}), encoding="utf-8")
        return media_id

    def get(self, media_id: str) -> tuple[bytes, str]:
        if not _SAFE_ID.match(media_id or ""):
            raise MediaNotFound(media_id)
        blob = self.directory / f"{media_id}.bin"
        meta = self.directory / f"{media_id}.meta"
        if not blob.exists() or not meta.exists():
            raise MediaNotFound(media_id)
        mime = json.loads(meta.read_text(encoding="utf-8"))["mime"]
        return blob.read_bytes(), mime

    def __contains__(self, media_id: str) -> bool:
        try:
            self.get(media_id)
            return True
        except MediaNotFound:
            return False
