"""Agent reply schema: the five-field structured output contract."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..agent_tools.charts import METRICS

AGENT_FIELDS = ("PERSONAL", "IMAGE", "URGENCY", "RESPONSES", "QUESTIONS")

_FENCE = re.compile(r"^```(?:json)?\s*(.*?)\s*```$", re.DOTALL)


class SchemaViolation(ValueError):
    """Model reply does not conform to the output schema."""


@dataclass
class ChartAsk:
    metric: str
    kind: str = "line"
    hours: float = 24.0


@dataclass
class AgentOutput:
    urgency: str                       # urgent | not_urgent
    responses: list[str]
    questions: list[str] = field(default_factory=list)
    personal: bool | str = False
    image: ChartAsk | None = None

    def to_json_dict(self) -> dict:
        image = None
        if self.image is not None:
            image = {"metric": self.image.metric, "kind": self.image.kind,
                     "hours": self.image.hours}
        return {
            "PERSONAL": self.personal,
            "IMAGE": image,
            "URGENCY": self.urgency,
            "RESPONSES": list(self.responses),
            "QUESTIONS": list(self.questions),
        }


def enforce_schema(model_text: str) -> AgentOutput:
    """Strict validation: exactly the five fields, correct shapes."""
    stripped = model_text.strip()
    fenced = _FENCE.match(stripped)
    if fenced:
        stripped = fenced.group(1)
    try:
        data = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"not a JSON object: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaViolation(f"expected an object, got {type(data).__name__}")
    missing = [k for k in AGENT_FIELDS if k not in data]
    if missing:
        raise SchemaViolation(f"missing fields: {missing}")
    unknown = [k for k in data if k not in AGENT_FIELDS]
    if unknown:
        raise SchemaViolation(f"unexpected fields: {unknown}")

    urgency = data["URGENCY"]
    if urgency not in ("urgent", "not_urgent"):
        raise SchemaViolation(f"URGENCY must be urgent|not_urgent, got {urgency!r}")

    responses = data["RESPONSES"]
    if (not isinstance(responses, list) or not responses
            or not all(isinstance(r, str) for r in responses)):
        raise SchemaViolation("RESPONSES must be a non-empty list of strings")

    questions = data["QUESTIONS"]
    if not isinstance(questions, list) or not all(isinstance(q, str)
                                                  for q in questions):
        raise SchemaViolation("QUESTIONS must be a list of strings")

    personal = data["PERSONAL"]
    if not isinstance(personal, (bool, str)):
        raise SchemaViolation("PERSONAL must be a flag or text")

    image_raw = data["IMAGE"]
    image: ChartAsk | None = None
    if image_raw not in (None, False):
        if not isinstance(image_raw, dict) or "metric" not in image_raw:
            raise SchemaViolation("IMAGE must be null or {metric, kind?, hours?}")
        extra = set(image_raw) - {"metric", "kind", "hours"}
        if extra:
            raise SchemaViolation(f"IMAGE has unexpected keys: {sorted(extra)}")
        metric = image_raw["metric"]
        if metric not in METRICS:
            raise SchemaViolation(f"IMAGE.metric must be one of {METRICS}")
        kind = image_raw.get("kind", "line")
        if kind not in ("line", "histogram"):
            raise SchemaViolation("IMAGE.kind must be line|histogram")
        hours_raw = image_raw.get("hours", 24.0)
        if isinstance(hours_raw, bool) or not isinstance(hours_raw, (int, float)) \
                or hours_raw <= 0:
            raise SchemaViolation("IMAGE.hours must be a positive number")
        image = ChartAsk(metric=metric, kind=kind, hours=float(hours_raw))

    return AgentOutput(urgency=urgency, responses=[str(r) for r in responses],
                       questions=[str(q) for q in questions],
                       personal=personal, image=image)
