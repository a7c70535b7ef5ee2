"""Burst packet codec and device-behavior simulator."""

from .codec import (
    ACCEL_SAMPLES,
    PACKET_BYTES,
    PPG_SAMPLES,
    TEMP_SAMPLES,
    ChecksumMismatch,
    LengthMismatch,
    SensorBurst,
    TruncatedPacket,
    WireError,
    crc16,
    decode,
    encode,
)
from .simulator import CycleRecord, DeviceConfig, DeviceState, simulate_device
from .synth import SyntheticVitalsSource, burst_from_channels, ratio_for_spo2

__all__ = [
    "ACCEL_SAMPLES",
    "PACKET_BYTES",
    "PPG_SAMPLES",
    "TEMP_SAMPLES",
    "ChecksumMismatch",
    "CycleRecord",
    "DeviceConfig",
    "DeviceState",
    "LengthMismatch",
    "SensorBurst",
    "SyntheticVitalsSource",
    "TruncatedPacket",
    "WireError",
    "burst_from_channels",
    "crc16",
    "decode",
    "encode",
    "ratio_for_spo2",
    "simulate_device",
]
