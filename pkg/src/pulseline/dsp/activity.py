"""Deterministic activity baseline from accelerometer magnitude variance.

Stand-in for a learned classifier: each axis is high-pass filtered to drop
the gravity component, then the variance of the residual magnitude (in g^2)
is compared against two calibrated thresholds.
"""

from __future__ import annotations

import numpy as np

from ..config import DspSettings
from .filters import FilterSpec, apply_filter, design_filter

ActivityLabel = str  # one of ACTIVITY_LABELS

ACTIVITY_LABELS = ("sit", "walk", "run")


def dynamic_magnitude_variance(accel_xyz, settings: DspSettings | None = None) -> float:
    """Variance (g^2) of the gravity-free acceleration magnitude."""
    s = settings or DspSettings()
    axes = [np.asarray(a, dtype=float) / s.counts_per_g for a in accel_xyz]
    if any(a.size < 1 for a in axes):
        raise ValueError("need at least one sample per axis")
    if len({a.size for a in axes}) != 1:
        raise ValueError("axes must have equal lengths")
    if axes[0].size == 1:
        return 0.0
    hp = design_filter(FilterSpec(
        kind="high_pass", cutoff_hz=s.accel_highpass_hz,
        sample_rate_hz=s.accel_rate_hz, order=s.filter_order))
    # step-matched state: a constant gravity component must vanish instead
    # of ringing through the 4 s window
    dynamic = [apply_filter(hp, a, step_matched=True) for a in axes]
    magnitude = np.sqrt(sum(d * d for d in dynamic))
    return float(np.var(magnitude))


def classify_activity_baseline(accel_xyz,
                               settings: DspSettings | None = None) -> ActivityLabel:
    s = settings or DspSettings()
    var = dynamic_magnitude_variance(accel_xyz, s)
    if var < s.activity_var_sit_walk:
        return "sit"
    if var < s.activity_var_walk_run:
        return "walk"
    return "run"
