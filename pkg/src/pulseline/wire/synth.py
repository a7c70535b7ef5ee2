"""Synthetic burst generation for the simulator, demos, and tests."""

from __future__ import annotations

import math
import random

from .codec import ACCEL_SAMPLES, PPG_SAMPLES, TEMP_SAMPLES, SensorBurst

# SpO2 mapping used across the system: spo2 = -45.060 R^2 + 30.354 R + 94.845
_QA, _QB, _QC = -45.060, 30.354, 94.845


def ratio_for_spo2(spo2_pct: float) -> float:
    """Invert the SpO2 quadratic, picking the physiologically plausible root.

    The quadratic peaks near 99.96% at R ~= 0.34; values above that are not
    reachable, so the argument is clipped to the attainable range first.
    """
    peak_r = -_QB / (2 * _QA)
    peak_spo2 = _QC + _QB * peak_r + _QA * peak_r * peak_r
    s = min(spo2_pct, peak_spo2 - 1e-9)
    disc = _QB * _QB - 4 * _QA * (_QC - s)
    # decreasing branch: the root to the right of the vertex
    return (-_QB - math.sqrt(disc)) / (2 * _QA)


def burst_from_channels(ts: int, channels: dict, device_id: str = "",
                        anomaly: bool = False) -> SensorBurst:
    burst = SensorBurst(
        ts=ts,
        accel_x=channels["accel_x"],
        accel_y=channels["accel_y"],
        accel_z=channels["accel_z"],
        ir=channels["ir"],
        red=channels["red"],
        temp_wrist=channels["temp_wrist"],
        temp_ambient=channels["temp_ambient"],
        device_id=device_id,
        anomaly=anomaly,
    )
    burst.validate()
    return burst


class SyntheticVitalsSource:
    """Deterministic signal source with controllable vitals.

    PPG channels are sinusoids at the pulse frequency riding on a DC level;
    the red/IR amplitude ratio is set so the AC/DC perfusion ratio R maps to
    the requested SpO2. Accelerometer output mimics the activity class, and
    temperatures are steady values in hundredths of a degree.
    """

    _ACTIVITY_PROFILES = {
        # (oscillation Hz, amplitude g)
        "sit": (0.0, 0.0),
        "walk": (2.0, 0.5),
        "run": (3.0, 1.5),
    }

    def __init__(self, hr_bpm: float = 72.0, spo2_pct: float = 97.0,
                 activity: str = "sit", temp_wrist_c: float = 33.1,
                 temp_ambient_c: float = 24.0, noise: float = 0.0,
                 counts_per_g: float = 256.0, seed: int = 0):
        if activity not in self._ACTIVITY_PROFILES:
            raise ValueError(f"unknown activity {activity!r}")
        self.hr_bpm = hr_bpm
        self.spo2_pct = spo2_pct
        self.activity = activity
        self.temp_wrist_c = temp_wrist_c
        self.temp_ambient_c = temp_ambient_c
        self.noise = noise
        self.counts_per_g = counts_per_g
        self._rng = random.Random(seed)

        self.dc_ir, self.ac_ir = 50_000.0, 2_000.0
        self.dc_red = 40_000.0
        # R = (ac_red/dc_red) / (ac_ir/dc_ir)
        r = ratio_for_spo2(spo2_pct)
        self.ac_red = r * (self.ac_ir / self.dc_ir) * self.dc_red

    def __call__(self, ts: int, ppg_rate_hz: float = 31.0,
                 accel_rate_hz: float = 34.0) -> dict:
        f = self.hr_bpm / 60.0
        noise = self.noise

        def ppg(dc: float, ac: float, n: int, fs: float) -> list[int]:
            out = []
            for i in range(n):
                v = dc + ac * math.sin(2 * math.pi * f * i / fs)
                if noise:
                    v += self._rng.gauss(0.0, noise * ac)
                out.append(max(0, min(65535, round(v))))
            return out

        osc_hz, amp_g = self._ACTIVITY_PROFILES[self.activity]
        amp = amp_g * self.counts_per_g
        gravity = self.counts_per_g  # 1 g on the z axis at rest

        def axis(scale: float, base: float) -> list[int]:
            out = []
            for i in range(ACCEL_SAMPLES):
                v = base + scale * math.sin(2 * math.pi * osc_hz * i / accel_rate_hz)
                if noise:
                    v += self._rng.gauss(0.0, noise * self.counts_per_g)
                out.append(max(-32768, min(32767, round(v))))
            return out

        def temp(celsius: float) -> list[int]:
            return [max(0, min(65535, round(celsius * 100)))] * TEMP_SAMPLES

        return {
            "accel_x": axis(amp, 0.0),
            "accel_y": axis(0.0, 0.0),
            "accel_z": axis(0.0, gravity),
            "ir": ppg(self.dc_ir, self.ac_ir, PPG_SAMPLES, ppg_rate_hz),
            "red": ppg(self.dc_red, self.ac_red, PPG_SAMPLES, ppg_rate_hz),
            "temp_wrist": temp(self.temp_wrist_c),
            "temp_ambient": temp(self.temp_ambient_c),
        }


PRESETS = {
    "normal": dict(hr_bpm=72.0, spo2_pct=97.5, activity="sit"),
    "high-hr": dict(hr_bpm=150.0, spo2_pct=97.0, activity="sit"),
    "low-spo2": dict(hr_bpm=80.0, spo2_pct=88.0, activity="sit"),
}


def preset_source(name: str, **overrides) -> SyntheticVitalsSource:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kwargs = dict(PRESETS[name])
    kwargs.update(overrides)
    return SyntheticVitalsSource(**kwargs)
