"""Companion-app filter chain and the conventional vitals baseline."""

from .activity import ActivityLabel, classify_activity_baseline
from .filters import (
    FilterCoefficients,
    FilterSpec,
    InvalidCutoff,
    apply_filter,
    design_filter,
    frequency_response,
    moving_average,
)
from .vitals import (
    ConventionalEstimate,
    EmptyInput,
    availability,
    estimate_conventional,
    spo2_from_ratio,
)

__all__ = [
    "ActivityLabel",
    "ConventionalEstimate",
    "EmptyInput",
    "FilterCoefficients",
    "FilterSpec",
    "InvalidCutoff",
    "apply_filter",
    "availability",
    "classify_activity_baseline",
    "design_filter",
    "estimate_conventional",
    "frequency_response",
    "moving_average",
    "spo2_from_ratio",
]
