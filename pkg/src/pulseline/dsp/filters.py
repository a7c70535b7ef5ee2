"""Recursive filter design and application.

Filters are built as cascaded second-order sections: analog Butterworth
prototypes mapped through the bilinear transform with frequency pre-warping
(the RBJ biquad formulation). A band-pass is the cascade of a high-pass at
the low edge and a low-pass at the high edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import sosfilt, sosfilt_zi, sosfiltfilt


class InvalidCutoff(ValueError):
    """Cutoff outside (0, fs/2) or band edges out of order."""


@dataclass
class FilterSpec:
    kind: str                     # low_pass | high_pass | band_pass
    cutoff_hz: float | tuple[float, float]
    sample_rate_hz: float
    order: int = 2

    def validate(self) -> None:
        if self.kind not in ("low_pass", "high_pass", "band_pass"):
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        nyquist = self.sample_rate_hz / 2.0
        cutoffs = self.cutoff_hz if isinstance(self.cutoff_hz, (tuple, list)) \
            else (self.cutoff_hz,)
        if self.kind == "band_pass":
            if len(cutoffs) != 2:
                raise InvalidCutoff("band_pass needs (low, high) cutoffs")
            if not cutoffs[0] < cutoffs[1]:
                raise InvalidCutoff("band_pass low cutoff must be below high")
        elif len(cutoffs) != 1:
            raise InvalidCutoff(f"{self.kind} takes a single cutoff")
        for fc in cutoffs:
            if not 0.0 < fc < nyquist:
                raise InvalidCutoff(
                    f"cutoff {fc} Hz outside (0, {nyquist}) for fs="
                    f"{self.sample_rate_hz} Hz"
                )


@dataclass
class FilterCoefficients:
    """Cascade of second-order sections, scipy sos layout (b0 b1 b2 1 a1 a2)."""

    sos: np.ndarray

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(section[3:]) for section in self.sos])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    @classmethod
    def identity(cls) -> "FilterCoefficients":
        return cls(sos=np.array([[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]]))


def _butterworth_qs(order: int) -> tuple[list[float], bool]:
    """Q per conjugate-pair section; flag marks a trailing real pole.

    Pole pair k of the analog prototype sits at angle pi*(2k+1)/(2n) off
    the imaginary axis, giving Q = 1 / (2 sin(angle)).
    """
    qs = [1.0 / (2.0 * math.sin(math.pi * (2 * k + 1) / (2 * order)))
          for k in range(order // 2)]
    return qs, order % 2 == 1


def _biquad(kind: str, fc: float, fs: float, q: float) -> list[float]:
    w0 = 2.0 * math.pi * fc / fs
    cos_w0, alpha = math.cos(w0), math.sin(w0) / (2.0 * q)
    if kind == "low_pass":
        b = [(1 - cos_w0) / 2, 1 - cos_w0, (1 - cos_w0) / 2]
    else:
        b = [(1 + cos_w0) / 2, -(1 + cos_w0), (1 + cos_w0) / 2]
    a = [1 + alpha, -2 * cos_w0, 1 - alpha]
    return [b[0] / a[0], b[1] / a[0], b[2] / a[0], 1.0, a[1] / a[0], a[2] / a[0]]


def _first_order(kind: str, fc: float, fs: float) -> list[float]:
    k = math.tan(math.pi * fc / fs)
    if kind == "low_pass":
        b = [k / (k + 1), k / (k + 1), 0.0]
    else:
        b = [1 / (k + 1), -1 / (k + 1), 0.0]
    return [b[0], b[1], b[2], 1.0, (k - 1) / (k + 1), 0.0]


def _design_edge(kind: str, fc: float, fs: float, order: int) -> list[list[float]]:
    qs, has_real_pole = _butterworth_qs(order)
    sections = [_biquad(kind, fc, fs, q) for q in qs]
    if has_real_pole:
        sections.append(_first_order(kind, fc, fs))
    return sections


def design_filter(spec: FilterSpec) -> FilterCoefficients:
    """Design stable recursive coefficients for the given spec."""
    spec.validate()
    fs = spec.sample_rate_hz
    if spec.kind == "band_pass":
        lo, hi = spec.cutoff_hz
        sections = _design_edge("high_pass", lo, fs, spec.order)
        sections += _design_edge("low_pass", hi, fs, spec.order)
    else:
        sections = _design_edge(spec.kind, float(spec.cutoff_hz), fs, spec.order)
    coeffs = FilterCoefficients(sos=np.asarray(sections, dtype=float))
    assert coeffs.is_stable(), "designed filter must have poles inside unit circle"
    return coeffs


def apply_filter(coeffs: FilterCoefficients, samples,
                 step_matched: bool = False) -> np.ndarray:
    """Causal filtering; output length equals input length.

    With `step_matched` the internal state is initialized as if the first
    sample had been applied forever, suppressing the startup transient
    (useful when a constant offset such as gravity must not leak through
    a high-pass).
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 1:
        raise ValueError("need at least one sample")
    if not step_matched:
        return sosfilt(coeffs.sos, x)
    zi = sosfilt_zi(coeffs.sos) * x[0]
    y, _ = sosfilt(coeffs.sos, x, zi=zi)
    return y


def apply_filter_zero_phase(coeffs: FilterCoefficients, samples) -> np.ndarray:
    """Forward-backward filtering: no phase distortion, squared magnitude.

    Used by the offline estimator where peak positions matter; not the
    causal `apply_filter` contract.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 1:
        raise ValueError("need at least one sample")
    return sosfiltfilt(coeffs.sos, x)


def frequency_response(coeffs: FilterCoefficients, freq_hz, fs: float) -> np.ndarray:
    """Complex response H(e^{j 2 pi f / fs}) evaluated directly from the sos."""
    w = 2.0 * np.pi * np.atleast_1d(np.asarray(freq_hz, dtype=float)) / fs
    z_inv = np.exp(-1j * w)
    h = np.ones_like(z_inv, dtype=complex)
    for b0, b1, b2, _, a1, a2 in coeffs.sos:
        h *= (b0 + b1 * z_inv + b2 * z_inv**2) / (1 + a1 * z_inv + a2 * z_inv**2)
    return h


def moving_average(samples, points: int) -> np.ndarray:
    """Centered moving average with edge reflection; used for DC tracking
    and for the 1 Hz temperature channel where the 3 Hz low-pass cannot
    apply (Nyquist is 0.5 Hz)."""
    x = np.asarray(samples, dtype=float)
    if points < 1:
        raise ValueError("points must be >= 1")
    if points == 1 or x.size == 1:
        return x.copy()
    points = min(points, x.size)
    half = points // 2
    padded = np.pad(x, (half, half), mode="reflect")
    smoothed = np.convolve(padded, np.ones(points) / points, mode="same")
    return smoothed[half:half + x.size]
