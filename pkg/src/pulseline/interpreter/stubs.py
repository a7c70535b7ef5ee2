"""Deterministic model clients: shipped for offline operation, not just tests.

- WaveformOracleClient: recovers vitals from the serialized channels in the
  prompt itself (FFT peak for HR, moment ratio for SpO2), so the full
  prompt -> completion -> parse loop runs with no network.
- SequenceEchoClient: replays a prepared list of replies in order.
- ScriptedClient: returns arbitrary canned texts and records every prompt.
"""

from __future__ import annotations

import json
import re
from typing import Iterable, Sequence

import numpy as np

from ..dsp.vitals import QA, QB, QC
from .client import ModelParams
from .parse import REPLY_FIELDS

_CHANNEL = re.compile(r"^(\w+) \((\d+) Hz\): \[(.*)\]$", re.MULTILINE)

_VERBOSE = {
    "sit": "User appears to be resting or seated.",
    "walk": "Movement pattern suggests the user is walking.",
    "run": "Strong periodic motion suggests the user is running.",
}


def parse_prompt_channels(prompt: str) -> dict[str, tuple[float, np.ndarray]]:
    """Read back the serialized channels; returns name -> (rate, samples)."""
    channels = {}
    for name, rate, body in _CHANNEL.findall(prompt):
        values = np.array([float(v) for v in body.split(",")]) if body.strip() \
            else np.array([])
        channels[name] = (float(rate), values)
    return channels


class WaveformOracleClient:
    """Offline estimator over the prompt's own numbers.

    HR comes from the dominant FFT bin of the IR channel (hr = 60 * f_peak),
    SpO2 from the red/IR AC-DC moment ratio through the shared quadratic,
    activity from the variance of the mean-free acceleration magnitude.
    """

    def __init__(self, activity_thresholds: tuple[float, float] = (0.005, 0.1),
                 counts_per_g: float = 256.0):
        self.activity_thresholds = activity_thresholds
        self.counts_per_g = counts_per_g
        self.calls = 0

    def complete(self, prompt: str, params: ModelParams) -> str:
        self.calls += 1
        channels = parse_prompt_channels(prompt)
        reply = {name: "N/A" for name in REPLY_FIELDS}

        ir_rate, ir = channels.get("ir", (31.0, np.array([])))
        _, red = channels.get("red", (31.0, np.array([])))
        if ir.size >= 4 and np.ptp(ir) > 0:
            spectrum = np.abs(np.fft.rfft(ir - ir.mean()))
            peak = int(np.argmax(spectrum[1:])) + 1
            f_dominant = peak * ir_rate / ir.size
            reply["hr"] = round(60.0 * f_dominant, 2)
            if red.size == ir.size and red.mean() > 0 and ir.mean() > 0:
                ac_ir = float(np.std(ir))
                ac_red = float(np.std(red))
                if ac_ir > 0:
                    r = (ac_red / red.mean()) / (ac_ir / ir.mean())
                    spo2 = QA * r * r + QB * r + QC
                    reply["spo2"] = round(float(min(max(spo2, 70.0), 100.0)), 2)

        axes = [channels.get(k, (34.0, np.array([])))[1] for k in ("a_x", "a_y", "a_z")]
        if all(a.size > 0 for a in axes) and len({a.size for a in axes}) == 1:
            dynamic = [(a - a.mean()) / self.counts_per_g for a in axes]
            variance = float(np.var(np.sqrt(sum(d * d for d in dynamic))))
            lo, hi = self.activity_thresholds
            label = "sit" if variance < lo else "walk" if variance < hi else "run"
            reply["activity"] = label
            reply["activity_verbose"] = _VERBOSE[label]

        for prompt_name, field in (("body", "temp_body"), ("ambient", "temp_ambient")):
            _, values = channels.get(prompt_name, (1.0, np.array([])))
            if values.size:
                reply[field] = round(float(values.mean()), 2)
        return json.dumps(reply)


class SequenceEchoClient:
    """Replays prepared six-field replies in order; raises when exhausted so
    a dropped or duplicated burst cannot go unnoticed."""

    def __init__(self, replies: Iterable[dict]):
        self._replies = list(replies)
        self.calls = 0

    def complete(self, prompt: str, params: ModelParams) -> str:
        if self.calls >= len(self._replies):
            raise RuntimeError("echo client exhausted: more completions than replies")
        reply = dict(self._replies[self.calls])
        self.calls += 1
        for name in REPLY_FIELDS:
            reply.setdefault(name, "N/A")
        return json.dumps(reply)


class ScriptedClient:
    """Returns canned texts in order and records every prompt it saw."""

    def __init__(self, texts: Sequence[str], repeat_last: bool = False):
        if not texts:
            raise ValueError("need at least one scripted text")
        self._texts = list(texts)
        self.repeat_last = repeat_last
        self.prompts: list[str] = []

    def complete(self, prompt: str, params: ModelParams) -> str:
        self.prompts.append(prompt)
        index = len(self.prompts) - 1
        if index >= len(self._texts):
            if self.repeat_last:
                return self._texts[-1]
            raise RuntimeError("scripted client exhausted")
        return self._texts[index]
