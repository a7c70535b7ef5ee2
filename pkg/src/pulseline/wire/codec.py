"""Bit-exact codec for the band's burst packet.

Layout (little-endian throughout, see docs/packet_format.md):

    offset  size  field
    0       4     ts            u32, unix seconds
    4       272   accel_x       136 x i16, raw ADC counts
    276     272   accel_y       136 x i16
    548     272   accel_z       136 x i16
    820     248   ir            124 x u16, raw PPG counts
    1068    248   red           124 x u16
    1316    8     temp_wrist    4 x u16, hundredths of degC
    1324    8     temp_ambient  4 x u16
    1332    2     crc           u16, CRC-16/CCITT-FALSE over bytes 0..1331

The device id travels out of band (BLE pairing / upload auth), so it is not
part of the packet; `decode` attaches whichever id the caller supplies.
"""

from __future__ import annotations

import binascii
import operator
import struct
from dataclasses import dataclass, field

ACCEL_SAMPLES = 136   # per axis, 34 Hz x 4 s
PPG_SAMPLES = 124     # per channel, 31 Hz x 4 s
TEMP_SAMPLES = 4      # per channel, 1 Hz x 4 s

_HEADER = struct.Struct("<I")
_ACCEL = struct.Struct(f"<{ACCEL_SAMPLES}h")
_PPG = struct.Struct(f"<{PPG_SAMPLES}H")
_TEMP = struct.Struct(f"<{TEMP_SAMPLES}H")
_CRC = struct.Struct("<H")

PACKET_BYTES = (
    _HEADER.size + 3 * _ACCEL.size + 2 * _PPG.size + 2 * _TEMP.size + _CRC.size
)


class WireError(Exception):
    """Base class for codec failures."""


class LengthMismatch(WireError):
    """A burst array has the wrong cardinality."""


class TruncatedPacket(WireError):
    """Input shorter than the fixed packet length."""


class ChecksumMismatch(WireError):
    """Trailing CRC does not match the payload."""


def crc16(data: bytes, crc: int = 0xFFFF) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection.

    `binascii.crc_hqx` is this exact polynomial/configuration; the test
    suite checks it against an independent table-driven reference.
    """
    return binascii.crc_hqx(data, crc)


@dataclass
class SensorBurst:
    """One 4-second multi-modal acquisition window."""

    ts: int
    accel_x: list[int]
    accel_y: list[int]
    accel_z: list[int]
    ir: list[int]
    red: list[int]
    temp_wrist: list[int]
    temp_ambient: list[int]
    device_id: str = ""
    anomaly: bool = field(default=False, compare=False)

    def validate(self) -> None:
        for name, samples, expected in (
            ("accel_x", self.accel_x, ACCEL_SAMPLES),
            ("accel_y", self.accel_y, ACCEL_SAMPLES),
            ("accel_z", self.accel_z, ACCEL_SAMPLES),
            ("ir", self.ir, PPG_SAMPLES),
            ("red", self.red, PPG_SAMPLES),
            ("temp_wrist", self.temp_wrist, TEMP_SAMPLES),
            ("temp_ambient", self.temp_ambient, TEMP_SAMPLES),
        ):
            if len(samples) != expected:
                raise LengthMismatch(
                    f"{name} has {len(samples)} samples, expected {expected}"
                )
        if not 0 <= self.ts <= 0xFFFFFFFF:
            raise ValueError(f"ts {self.ts} outside u32 range")
        for name, samples, lo, hi in (
            ("accel_x", self.accel_x, -32768, 32767),
            ("accel_y", self.accel_y, -32768, 32767),
            ("accel_z", self.accel_z, -32768, 32767),
            ("ir", self.ir, 0, 65535),
            ("red", self.red, 0, 65535),
            ("temp_wrist", self.temp_wrist, 0, 65535),
            ("temp_ambient", self.temp_ambient, 0, 65535),
        ):
            for v in samples:
                try:
                    v = operator.index(v)
                except TypeError:
                    raise TypeError(
                        f"{name} sample {v!r} is not an integer"
                    ) from None
                if not lo <= v <= hi:
                    raise ValueError(f"{name} sample {v} outside [{lo}, {hi}]")

    def sample_count(self) -> int:
        return 3 * ACCEL_SAMPLES + 2 * PPG_SAMPLES + 2 * TEMP_SAMPLES

    def to_json_dict(self) -> dict:
        """Upload representation used by the /v1/sensors body."""
        return {
            "ts": self.ts,
            "accel_x": list(self.accel_x),
            "accel_y": list(self.accel_y),
            "accel_z": list(self.accel_z),
            "ir": list(self.ir),
            "red": list(self.red),
            "temp_wrist": list(self.temp_wrist),
            "temp_ambient": list(self.temp_ambient),
            "anomaly": self.anomaly,
        }

    @classmethod
    def from_json_dict(cls, data: dict, device_id: str = "") -> "SensorBurst":
        burst = cls(
            ts=int(data["ts"]),
            accel_x=[int(v) for v in data["accel_x"]],
            accel_y=[int(v) for v in data["accel_y"]],
            accel_z=[int(v) for v in data["accel_z"]],
            ir=[int(v) for v in data["ir"]],
            red=[int(v) for v in data["red"]],
            temp_wrist=[int(v) for v in data["temp_wrist"]],
            temp_ambient=[int(v) for v in data["temp_ambient"]],
            device_id=device_id or str(data.get("device_id", "")),
            anomaly=bool(data.get("anomaly", False)),
        )
        burst.validate()
        return burst


def encode(burst: SensorBurst) -> bytes:
    """Serialize a burst into the fixed packet layout, CRC appended."""
    burst.validate()
    body = b"".join(
        (
            _HEADER.pack(burst.ts),
            _ACCEL.pack(*burst.accel_x),
            _ACCEL.pack(*burst.accel_y),
            _ACCEL.pack(*burst.accel_z),
            _PPG.pack(*burst.ir),
            _PPG.pack(*burst.red),
            _TEMP.pack(*burst.temp_wrist),
            _TEMP.pack(*burst.temp_ambient),
        )
    )
    return body + _CRC.pack(crc16(body))


def decode(data: bytes, device_id: str = "") -> SensorBurst:
    """Exact inverse of `encode`; verifies length and CRC before parsing."""
    if len(data) < PACKET_BYTES:
        raise TruncatedPacket(f"got {len(data)} bytes, expected {PACKET_BYTES}")
    if len(data) > PACKET_BYTES:
        raise WireError(f"got {len(data)} bytes, expected {PACKET_BYTES}")
    body, (stored_crc,) = data[:-2], _CRC.unpack(data[-2:])
    computed = crc16(body)
    if stored_crc != computed:
        raise ChecksumMismatch(
            f"crc stored=0x{stored_crc:04X} computed=0x{computed:04X}"
        )
    offset = 0

    def take(s: struct.Struct):
        nonlocal offset
        values = s.unpack_from(body, offset)
        offset += s.size
        return values

    (ts,) = take(_HEADER)
    ax = list(take(_ACCEL))
    ay = list(take(_ACCEL))
    az = list(take(_ACCEL))
    ir = list(take(_PPG))
    red = list(take(_PPG))
    tw = list(take(_TEMP))
    ta = list(take(_TEMP))
    return SensorBurst(
        ts=ts, accel_x=ax, accel_y=ay, accel_z=az, ir=ir, red=red,
        temp_wrist=tw, temp_ambient=ta, device_id=device_id,
    )
