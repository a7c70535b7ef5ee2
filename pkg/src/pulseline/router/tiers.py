"""Query-complexity tiers and the deterministic heuristic classifier.

The default classifier is keyword/length based and config-exposed; a
model-backed classifier can be dropped in behind the same callable shape
(text -> Tier) using any ModelClient.
"""

from __future__ import annotations

import re
from enum import Enum

from ..config import RouterSettings
from .costs import estimate_tokens


class Tier(Enum):
    SIMPLE = "simple"
    REASONING = "reasoning"
    HIGH_RISK = "high_risk"


_GREETINGS = ("hi", "hello", "hello there", "hey", "salam", "salaam",
              "good morning", "good evening", "thanks", "thank you", "ok",
              "okay", "yes", "no")

_DATA_REQUEST = re.compile(
    r"^(show|send|get|check|what(?:'s| is| was| are)? my)\b")


class TierClassifier:
    def __init__(self, settings: RouterSettings | None = None):
        self.settings = settings or RouterSettings()

    def classify(self, query: str) -> Tier:
        if not query or not query.strip():
            raise ValueError("query must be non-empty")
        text = query.strip().lower()
        # urgency dominates: risk > reasoning > simple
        if any(k in text for k in self.settings.high_risk_keywords):
            return Tier.HIGH_RISK
        if any(k in text for k in self.settings.reasoning_keywords):
            return Tier.REASONING
        bare = re.sub(r"[^a-z ]", "", text).strip()
        tokens = estimate_tokens(query)
        if bare in _GREETINGS or tokens < self.settings.simple_max_tokens:
            return Tier.SIMPLE
        if _DATA_REQUEST.match(text) and tokens <= 2 * self.settings.simple_max_tokens:
            return Tier.SIMPLE
        return Tier.REASONING

    def model_for(self, tier: Tier) -> str:
        return self.settings.tier_models[tier.value]


def classify(query: str, settings: RouterSettings | None = None) -> Tier:
    return TierClassifier(settings).classify(query)
