"""Service configuration: one dataclass tree, optionally overridden from YAML.

Every tunable that the operations expose (filter specs, gating thresholds,
tier bindings, alert bounds, scheduler defaults) lives here so tests and the
CLI share a single source of defaults.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml


@dataclass
class DspSettings:
    ppg_rate_hz: float = 31.0
    accel_rate_hz: float = 34.0
    temp_rate_hz: float = 1.0
    ppg_band_hz: tuple[float, float] = (0.5, 2.5)
    accel_highpass_hz: float = 0.2
    # 3 Hz low-pass is kept for any future temperature source sampled above
    # 6 Hz; the 1 Hz channel itself uses the moving average below.
    temp_lowpass_hz: float = 3.0
    temp_ma_points: int = 3
    filter_order: int = 2
    dc_ma_seconds: float = 1.0
    peak_spacing_divisor: float = 3.0
    peak_prominence_frac: float = 0.25
    hr_gate_bpm: tuple[float, float] = (40.0, 185.0)
    dc_floor: float = 1000.0
    ratio_gate: tuple[float, float] = (0.3, 1.1)
    spo2_clamp: tuple[float, float] = (70.0, 100.0)
    counts_per_g: float = 256.0
    # variance of the gravity-free acceleration magnitude, in g^2
    activity_var_sit_walk: float = 0.005
    activity_var_walk_run: float = 0.1


@dataclass
class InterpreterSettings:
    model_name: str = "gpt-4o-mini"
    temperature: float = 1.3
    top_p: float = 0.8
    max_retries: int = 1


@dataclass
class RouterSettings:
    prices_per_1k: dict[str, float] = field(default_factory=lambda: {
        "gpt-4o-mini": 0.00015,
        "gpt-3.5-turbo": 0.001,
        "o3-mini": 0.00125,
        "o1": 0.015,
    })
    tier_models: dict[str, str] = field(default_factory=lambda: {
        "simple": "gpt-4o-mini",
        "reasoning": "o3-mini",
        "high_risk": "o1",
    })
    baseline_model: str = "o1"
    overhead_model: str = "gpt-4o-mini"
    simple_max_tokens: int = 8
    reasoning_keywords: tuple[str, ...] = (
        "trend", "summar", "compare", "average", "week", "history",
        "pattern", "analy", "explain", "report", "over time", "progress",
    )
    high_risk_keywords: tuple[str, ...] = (
        "pain", "chest", "dizzy", "faint", "breath", "emergency", "urgent",
        "drop", "spike", "anomal", "collapse", "numb", "hurt", "blood",
        "can't", "cannot", "help me",
    )


@dataclass
class AlertThresholds:
    hr_low: float = 50.0
    hr_high: float = 120.0
    spo2_low: float = 92.0
    temp_wrist_high: float = 38.0


@dataclass
class OrchestratorSettings:
    history_turns: int = 10
    metrics_window: int = 90
    hr_sustained_count: int = 3
    thresholds: AlertThresholds = field(default_factory=AlertThresholds)


@dataclass
class SchedulerSettings:
    daily_summary_cron: str = "0 9 * * *"
    no_data_check_cron: str = "0 */6 * * *"
    no_data_interval_s: float = 6 * 3600.0


@dataclass
class GatewaySettings:
    host: str = "127.0.0.1"
    port: int = 8040
    data_dir: str = "./pulseline_data"


@dataclass
class LiveModelSettings:
    """Credentials for the hosted chat-completions API; env vars win."""

    endpoint: str = ""
    api_key_env: str = "PULSELINE_API_KEY"
    endpoint_env: str = "PULSELINE_API_ENDPOINT"

    def resolve_endpoint(self) -> str:
        return os.environ.get(self.endpoint_env, "") or self.endpoint

    def resolve_api_key(self) -> str:
        return os.environ.get(self.api_key_env, "")


@dataclass
class ServiceConfig:
    dsp: DspSettings = field(default_factory=DspSettings)
    interpreter: InterpreterSettings = field(default_factory=InterpreterSettings)
    router: RouterSettings = field(default_factory=RouterSettings)
    orchestrator: OrchestratorSettings = field(default_factory=OrchestratorSettings)
    scheduler: SchedulerSettings = field(default_factory=SchedulerSettings)
    gateway: GatewaySettings = field(default_factory=GatewaySettings)
    live_model: LiveModelSettings = field(default_factory=LiveModelSettings)


def _merge(obj, overrides: dict):
    for key, value in overrides.items():
        if not hasattr(obj, key):
            raise KeyError(f"unknown config key: {key!r}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current) and isinstance(value, dict):
            _merge(current, value)
        elif isinstance(current, tuple) and isinstance(value, (list, tuple)):
            setattr(obj, key, tuple(value))
        else:
            setattr(obj, key, value)
    return obj


def load_config(path: str | Path | None = None) -> ServiceConfig:
    """Build the config from defaults, merging a YAML file when given."""
    config = ServiceConfig()
    if path is None:
        return config
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise ValueError(f"config root must be a mapping, got {type(data).__name__}")
    return _merge(config, data)
