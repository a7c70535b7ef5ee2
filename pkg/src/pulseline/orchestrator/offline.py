"""Offline agent brain: a deterministic ModelClient covering every prompt
the orchestrator issues, so the whole service runs with no hosted model.

Waveform prompts delegate to the FFT oracle; QC reviews approve by default;
sign-up extraction uses plain pattern matching; chat prompts compose a
schema-valid reply from whatever context the bundle carries.
"""

from __future__ import annotations

import json
import re

from ..interpreter.client import ModelParams
from ..interpreter.stubs import WaveformOracleClient
from .context import EXTRACT_MARKER, QC_MARKER

_USER_MESSAGE = re.compile(r"User message: (.*?)\n\n## Output Structure",
                           re.DOTALL)
_USER_REPLY = re.compile(r"User reply: (.*)")
_METRIC_LINE = re.compile(r"ts=(\S+) hr=(\S+) spo2=(\S+) activity=(\S+) "
                          r"temp_body=(\S+) temp_ambient=(\S+)")
_PROFILE_NAME = re.compile(r'"name": "([^"]+)"')

_AGE = re.compile(r"\b(?:i am|i'm|im|age is|aged|age:)\s*(\d{1,3})\b", re.I)
_BARE_NUMBER = re.compile(r"^\s*(\d{1,3})\s*(?:years?(?: old)?)?\s*$", re.I)
_NAME = re.compile(r"\b(?:my name is|name's|call me|i am|i'm)\s+"
                   r"([A-Za-z][A-Za-z'-]+)", re.I)
_BMI = re.compile(r"\bbmi\s*(?:is|=|:)?\s*(\d{1,2}(?:\.\d+)?)", re.I)
_MEDICAL = re.compile(r"\bi have\s+([a-z0-9 ,'-]+)", re.I)

_CHARTY = re.compile(r"\b(chart|graph|plot|visuali[sz]e)\b", re.I)
_SUMMARY = re.compile(r"\b(summar|report|overview|daily recap)", re.I)
_RISKY = re.compile(r"\b(chest|pain|dizzy|faint|breath|emergency)\b", re.I)

_METRIC_WORDS = (
    ("spo2", re.compile(r"\b(spo2|oxygen|saturation)\b", re.I)),
    ("temp_body", re.compile(r"\b(temperature|temp|fever)\b", re.I)),
    ("activity", re.compile(r"\b(activity|steps|movement|walk)\b", re.I)),
    ("hr", re.compile(r"\b(heart|hr|pulse|bpm)\b", re.I)),
)


def _extract_profile(reply: str) -> dict:
    found: dict = {}
    name = _NAME.search(reply)
    if name and not name.group(1).isdigit():
        found["name"] = name.group(1)
    age = _AGE.search(reply) or _BARE_NUMBER.match(reply)
    if age:
        value = int(age.group(1))
        if 5 <= value <= 120:
            found["age"] = value
    bmi = _BMI.search(reply)
    if bmi:
        found["bmi"] = float(bmi.group(1))
    medical = _MEDICAL.search(reply)
    if medical:
        found["medical_background"] = medical.group(1).strip()
    return found


class OfflineAgentClient:
    """Deterministic stand-in for the hosted models."""

    def __init__(self):
        self._waveform = WaveformOracleClient()
        self.calls = 0

    def complete(self, prompt: str, params: ModelParams) -> str:
        self.calls += 1
        if "ir (31 Hz):" in prompt:
            return self._waveform.complete(prompt, params)
        if QC_MARKER in prompt:
            return json.dumps({"verdict": "approve"})
        if EXTRACT_MARKER in prompt:
            reply_match = _USER_REPLY.search(prompt)
            reply = reply_match.group(1) if reply_match else ""
            return json.dumps(_extract_profile(reply))
        return self._chat_reply(prompt)

    def _chat_reply(self, prompt: str) -> str:
        message_match = _USER_MESSAGE.search(prompt)
        message = message_match.group(1).strip() if message_match else ""
        metrics = _METRIC_LINE.findall(prompt)
        latest = metrics[-1] if metrics else None
        name_match = _PROFILE_NAME.search(prompt)
        name = name_match.group(1) if name_match else ""

        def reading(slot: int, label: str, unit: str) -> str | None:
            if latest is None or latest[slot] == "n/a":
                return None
            return f"{label} {latest[slot]}{unit}"

        hr = reading(1, "heart rate", " BPM")
        spo2 = reading(2, "SpO2", "%")
        greeting = f"Hi {name}!" if name else "Hi!"

        responses: list[str]
        questions = ["Show my heart rate chart", "Summarize my day"]
        urgency = "not_urgent"
        image = None

        if _RISKY.search(message):
            urgency = "urgent"
            responses = [
                "That sounds uncomfortable. Please stop, sit down, and take "
                "slow breaths for a couple of minutes.",
                "I'm only a wellness aid, not a medical service. If this "
                "feeling continues or gets worse, contact a clinician or "
                "someone nearby right away.",
            ]
            questions = ["Check my latest vitals", "Remind me in 10 minutes"]
        elif _SUMMARY.search(message):
            parts = [p for p in (hr, spo2) if p]
            stats = "; latest " + ", ".join(parts) if parts else ""
            responses = [
                f"{greeting} Here is your summary.",
                f"I logged {len(metrics)} recent readings{stats}.",
                "Overall things look steady. A glass of water and a short "
                "walk are easy wins today.",
            ]
        elif _CHARTY.search(message):
            metric = next((m for m, pattern in _METRIC_WORDS
                           if pattern.search(message)), "hr")
            image = {"metric": metric, "kind": "line", "hours": 24}
            responses = [f"Here is your {metric} chart for the last day."]
            questions = ["Summarize my day", "Anything unusual?"]
        else:
            parts = [p for p in (hr, spo2) if p]
            if parts:
                responses = [f"{greeting} Your latest readings: "
                             f"{', '.join(parts)}."]
            else:
                responses = [f"{greeting} I don't have readings yet; once the "
                             "band uploads, ask me anything about your vitals."]

        return json.dumps({
            "PERSONAL": bool(name or latest),
            "IMAGE": image,
            "URGENCY": urgency,
            "RESPONSES": responses,
            "QUESTIONS": questions,
        })
