"""Conventional HR/SpO2 estimation with quality gating.

Pipeline per burst: moving-average DC removal, 0.5-2.5 Hz band-pass,
IR peak detection (minimum prominence and spacing), HR from the mean
inter-peak interval, and SpO2 from the red/IR AC-DC perfusion ratio via
the pulse-oximeter reference quadratic. Gating suppresses outputs when
the signal fails basic plausibility checks; an invalid estimate is a
legal result and counts against availability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from ..config import DspSettings
from ..wire.codec import SensorBurst
from .filters import (
    FilterSpec,
    apply_filter_zero_phase,
    design_filter,
    moving_average,
)

# spo2 = QA * R^2 + QB * R + QC (pulse-oximeter reference design quadratic)
QA, QB, QC = -45.060, 30.354, 94.845


class EmptyInput(ValueError):
    """Aggregate asked for on an empty result list."""


@dataclass
class ConventionalEstimate:
    hr_bpm: float | None = None
    spo2_pct: float | None = None
    hr_valid: bool = False
    spo2_valid: bool = False
    peak_indices: list[int] = field(default_factory=list)
    ratio_r: float | None = None


def spo2_from_ratio(r: float, clamp: tuple[float, float] = (70.0, 100.0)) -> float:
    value = QA * r * r + QB * r + QC
    return float(min(max(value, clamp[0]), clamp[1]))


def _refine_peaks(signal: np.ndarray, peaks: np.ndarray) -> np.ndarray:
    """Sub-sample peak positions via parabolic interpolation over each
    detected maximum and its neighbors; integer indices stay put at the
    window edges or on degenerate curvature."""
    refined = peaks.astype(float)
    for i, p in enumerate(peaks):
        if 0 < p < signal.size - 1:
            left, mid, right = signal[p - 1], signal[p], signal[p + 1]
            denom = left - 2.0 * mid + right
            if denom < 0:  # true local maximum curvature
                refined[i] = p + 0.5 * (left - right) / denom
    return refined


class ConventionalEstimator:
    """Holds designed coefficients so repeated bursts share one filter bank."""

    def __init__(self, settings: DspSettings | None = None):
        self.settings = settings or DspSettings()
        s = self.settings
        self._band = design_filter(FilterSpec(
            kind="band_pass", cutoff_hz=s.ppg_band_hz,
            sample_rate_hz=s.ppg_rate_hz, order=s.filter_order))
        self._dc_window = max(1, round(s.dc_ma_seconds * s.ppg_rate_hz))

    def estimate(self, burst: SensorBurst) -> ConventionalEstimate:
        s = self.settings
        fs = s.ppg_rate_hz
        ir = np.asarray(burst.ir, dtype=float)
        red = np.asarray(burst.red, dtype=float)

        dc_ir = float(np.mean(ir))
        dc_red = float(np.mean(red))

        ir_f = apply_filter_zero_phase(self._band, ir - moving_average(ir, self._dc_window))
        red_f = apply_filter_zero_phase(self._band, red - moving_average(red, self._dc_window))

        est = ConventionalEstimate()
        span = float(np.max(ir_f) - np.min(ir_f))
        if span <= 0:
            return est
        peaks, _ = find_peaks(
            ir_f,
            distance=max(1, int(fs / s.peak_spacing_divisor)),
            prominence=s.peak_prominence_frac * span,
        )
        est.peak_indices = peaks.tolist()
        if len(peaks) < 2:
            return est

        refined = _refine_peaks(ir_f, peaks)
        mean_gap = float(np.mean(np.diff(refined)))
        hr = 60.0 * fs / mean_gap
        lo, hi = s.hr_gate_bpm
        if lo <= hr <= hi and dc_ir >= s.dc_floor:
            est.hr_bpm = hr
            est.hr_valid = True

        if dc_ir > 0 and dc_red > 0:
            ac_ir = float(np.std(ir_f))
            ac_red = float(np.std(red_f))
            if ac_ir > 0:
                est.ratio_r = (ac_red / dc_red) / (ac_ir / dc_ir)
        r_lo, r_hi = s.ratio_gate
        if (est.hr_valid and est.ratio_r is not None
                and r_lo <= est.ratio_r <= r_hi and dc_red >= s.dc_floor):
            est.spo2_pct = spo2_from_ratio(est.ratio_r, s.spo2_clamp)
            est.spo2_valid = True
        else:
            est.spo2_pct = None
        return est


def estimate_conventional(burst: SensorBurst,
                          settings: DspSettings | None = None) -> ConventionalEstimate:
    return ConventionalEstimator(settings).estimate(burst)


def availability(results: list[ConventionalEstimate]) -> float:
    """Percentage of estimates with both HR and SpO2 valid."""
    if not results:
        raise EmptyInput("availability of an empty result list")
    valid = sum(1 for r in results if r.hr_valid and r.spo2_valid)
    return 100.0 * valid / len(results)
