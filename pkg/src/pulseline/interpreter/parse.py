"""Strict parsing of the interpreter's six-field JSON reply."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields

REPLY_FIELDS = ("hr", "spo2", "activity", "activity_verbose",
                "temp_body", "temp_ambient")

HR_RANGE = (20.0, 250.0)
SPO2_RANGE = (50.0, 100.0)

_FENCE = re.compile(r"^```(?:json)?\s*(.*?)\s*```$", re.DOTALL)


class MalformedReply(ValueError):
    """Reply is not the expected six-field JSON object."""


@dataclass
class VitalEstimate:
    """Per-burst derived vitals; absent fields were 'N/A' in the reply."""

    hr: float | None = None
    spo2: float | None = None
    activity: str | None = None
    activity_verbose: str | None = None
    temp_body: float | None = None
    temp_ambient: float | None = None
    source: str = "llm"          # llm | conventional
    burst_ts: int | None = None
    clamped_fields: tuple[str, ...] = field(default=(), compare=False)

    def has_numeric_vitals(self) -> bool:
        return self.hr is not None and self.spo2 is not None

    def to_json_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "VitalEstimate":
        kwargs = dict(data)
        if "clamped_fields" in kwargs:
            kwargs["clamped_fields"] = tuple(kwargs["clamped_fields"])
        return cls(**kwargs)


def _is_absent(value) -> bool:
    return isinstance(value, str) and value.strip().upper() == "N/A"


def _numeric(name: str, value) -> float:
    if isinstance(value, bool):
        raise MalformedReply(f"{name} must be a number, got a boolean")
    if isinstance(value, (int, float)):
        number = float(value)
    elif isinstance(value, str):
        try:
            number = float(value.strip())
        except ValueError:
            raise MalformedReply(f"{name} is not numeric: {value!r}") from None
    else:
        raise MalformedReply(f"{name} has unsupported type {type(value).__name__}")
    if not math.isfinite(number):
        raise MalformedReply(f"{name} is not finite: {value!r}")
    return number


def _text(name: str, value) -> str:
    if not isinstance(value, str):
        raise MalformedReply(f"{name} must be text, got {type(value).__name__}")
    return value


def parse_reply(text: str) -> VitalEstimate:
    """Parse the model reply; 'N/A' maps to absent, out-of-range values are
    clamped and flagged. Anything else raises MalformedReply."""
    stripped = text.strip()
    fenced = _FENCE.match(stripped)
    if fenced:
        stripped = fenced.group(1)
    try:
        data = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise MalformedReply(f"not a JSON object: {exc}") from None
    if not isinstance(data, dict):
        raise MalformedReply(f"expected an object, got {type(data).__name__}")
    missing = [k for k in REPLY_FIELDS if k not in data]
    if missing:
        raise MalformedReply(f"missing fields: {missing}")
    unknown = [k for k in data if k not in REPLY_FIELDS]
    if unknown:
        raise MalformedReply(f"unexpected fields: {unknown}")

    est = VitalEstimate()
    clamped: list[str] = []
    for name, bounds in (("hr", HR_RANGE), ("spo2", SPO2_RANGE),
                         ("temp_body", None), ("temp_ambient", None)):
        value = data[name]
        if value is None or _is_absent(value):
            continue
        number = _numeric(name, value)
        if bounds is not None:
            lo, hi = bounds
            if not lo <= number <= hi:
                number = min(max(number, lo), hi)
                clamped.append(name)
        setattr(est, name, number)
    for name in ("activity", "activity_verbose"):
        value = data[name]
        if value is None or _is_absent(value):
            continue
        setattr(est, name, _text(name, value))
    est.clamped_fields = tuple(clamped)
    return est


def serialize_estimate(est: VitalEstimate) -> str:
    """Canonical reply text for an estimate; inverse of parse_reply for
    estimates representable in the schema."""
    def out(value):
        return "N/A" if value is None else value

    return json.dumps({name: out(getattr(est, name)) for name in REPLY_FIELDS})
