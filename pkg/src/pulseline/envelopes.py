"""Chat envelope: the single message shape shared by gateway, orchestrator,
and transports."""

from __future__ import annotations

from dataclasses import dataclass, field


KINDS = ("text", "audio", "button", "image")


class TransportUnavailable(RuntimeError):
    """Outbound delivery failed; the envelope stays queued for retry."""


@dataclass
class ChatEnvelope:
    direction: str            # inbound | outbound
    user_phone: str
    ts: float
    kind: str                 # text | audio | button | image
    body: str                 # text content or media reference
    buttons: list[str] = field(default_factory=list)
    reply_to: str | None = None
    envelope_id: int | None = None

    def validate(self) -> None:
        if self.direction not in ("inbound", "outbound"):
            raise ValueError(f"bad direction {self.direction!r}")
        if self.kind not in KINDS:
            raise ValueError(f"bad kind {self.kind!r}")
        if self.kind == "audio" and not self.body:
            raise ValueError("audio envelope needs a media reference")
        if self.kind == "button" and self.direction == "inbound" and not self.body:
            raise ValueError("button envelope needs the pressed label")

    def to_json_dict(self) -> dict:
        return {
            "direction": self.direction,
            "user_phone": self.user_phone,
            "ts": self.ts,
            "kind": self.kind,
            "body": self.body,
            "buttons": list(self.buttons),
            "reply_to": self.reply_to,
            "envelope_id": self.envelope_id,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ChatEnvelope":
        env = cls(
            direction=data["direction"],
            user_phone=data["user_phone"],
            ts=float(data["ts"]),
            kind=data["kind"],
            body=str(data.get("body", "")),
            buttons=[str(b) for b in data.get("buttons", [])],
            reply_to=data.get("reply_to"),
            envelope_id=data.get("envelope_id"),
        )
        env.validate()
        return env
