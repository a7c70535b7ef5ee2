"""Tiered model selection and input-token cost accounting."""

from .costs import (
    CostRecord,
    CostSummary,
    EmptyInput,
    PriceTable,
    UnknownModel,
    cost,
    cost_study,
    estimate_tokens,
    load_queries,
)
from .tiers import Tier, TierClassifier, classify

__all__ = [
    "CostRecord",
    "CostSummary",
    "EmptyInput",
    "PriceTable",
    "Tier",
    "TierClassifier",
    "UnknownModel",
    "classify",
    "cost",
    "cost_study",
    "estimate_tokens",
    "load_queries",
]
