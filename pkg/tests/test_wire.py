import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulseline.wire import (
    PACKET_BYTES,
    ChecksumMismatch,
    DeviceConfig,
    DeviceState,
    SensorBurst,
    SyntheticVitalsSource,
    TruncatedPacket,
    crc16,
    decode,
    encode,
    simulate_device,
)
from pulseline.wire.codec import ACCEL_SAMPLES, LengthMismatch, PPG_SAMPLES, TEMP_SAMPLES

from conftest import random_burst, zero_burst


# --- independent CRC reference (table-driven, built from the polynomial) ---

def _build_table(poly: int = 0x1021) -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ poly) if crc & 0x8000 else (crc << 1)
            crc &= 0xFFFF
        table.append(crc)
    return table


_TABLE = _build_table()


def crc16_reference(data: bytes, crc: int = 0xFFFF) -> int:
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ _TABLE[((crc >> 8) ^ b) & 0xFF]
    return crc


class TestCrc:
    def test_standard_check_value(self):
        assert crc16(b"123456789") == 0x29B1
        assert crc16_reference(b"123456789") == 0x29B1

    def test_matches_reference_on_random_data(self, rng):
        for _ in range(50):
            blob = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 300)))
            assert crc16(blob) == crc16_reference(blob)

    def test_empty_input(self):
        assert crc16(b"") == 0xFFFF == crc16_reference(b"")


class TestCodec:
    def test_zero_burst_round_trip(self):
        b = zero_burst()
        blob = encode(b)
        assert len(blob) == PACKET_BYTES
        assert decode(blob) == b

    def test_random_round_trips(self, rng):
        for _ in range(100):
            b = random_burst(rng, device_id="dev-1")
            assert decode(encode(b), device_id="dev-1") == b

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, seed, ts):
        b = random_burst(random.Random(seed))
        b.ts = ts
        assert decode(encode(b)) == b

    def test_ts_only_difference_localized(self):
        b1 = zero_burst(ts=0)
        b2 = zero_burst(ts=0xDEADBEEF)
        e1, e2 = encode(b1), encode(b2)
        diff = [i for i, (x, y) in enumerate(zip(e1, e2)) if x != y]
        ts_bytes = set(range(0, 4))
        crc_bytes = {PACKET_BYTES - 2, PACKET_BYTES - 1}
        assert set(diff) <= ts_bytes | crc_bytes
        assert set(diff) & ts_bytes  # ts actually changed

    def test_flipped_byte_rejected(self, rng):
        blob = bytearray(encode(random_burst(rng)))
        idx = rng.randrange(len(blob))
        blob[idx] ^= 0xFF
        with pytest.raises(ChecksumMismatch):
            decode(bytes(blob))

    def test_empty_input_truncated(self):
        with pytest.raises(TruncatedPacket):
            decode(b"")

    def test_short_input_truncated(self):
        with pytest.raises(TruncatedPacket):
            decode(encode(zero_burst())[:-1])

    def test_wrong_cardinality_rejected(self):
        b = zero_burst()
        b.ir = b.ir[:-1]
        with pytest.raises(LengthMismatch):
            encode(b)

    def test_every_single_bit_corruption_detected(self, rng):
        blob = encode(random_burst(rng))
        for byte_idx in range(len(blob)):
            for bit in range(8):
                corrupted = bytearray(blob)
                corrupted[byte_idx] ^= 1 << bit
                with pytest.raises(ChecksumMismatch):
                    decode(bytes(corrupted))

    def test_json_dict_round_trip(self, rng):
        b = random_burst(rng, device_id="d")
        assert SensorBurst.from_json_dict(b.to_json_dict(), device_id="d") == b


class TestSimulator:
    def test_single_cycle_state_trace(self):
        [cycle] = simulate_device(DeviceConfig(), n_cycles=1)
        assert [s.value for s in cycle.trace] == ["Reset", "Scan", "Collect", "Transmit"]

    def test_default_transmit_time_near_paper_figure(self):
        [cycle] = simulate_device(DeviceConfig(), n_cycles=1)
        assert abs(cycle.transmit_s - 7.4) <= 0.5
        assert cycle.durations[DeviceState.COLLECT] == 4.0

    def test_fifo_buffering_across_outage(self):
        records = simulate_device(
            DeviceConfig(), n_cycles=3, uplink=[False, False, True])
        assert [len(r.delivered) for r in records] == [0, 0, 3]
        assert records[2].delivered == [records[0].packet, records[1].packet,
                                        records[2].packet]

    def test_ts_monotonic_across_cycles(self):
        records = simulate_device(DeviceConfig(), n_cycles=5, start_ts=1_700_000_000)
        ts = [r.burst.ts for r in records]
        assert all(a < b for a, b in zip(ts, ts[1:]))

    def test_packets_decode_to_bursts(self):
        source = SyntheticVitalsSource(hr_bpm=72.0)
        [cycle] = simulate_device(DeviceConfig(), source, n_cycles=1,
                                  device_id="sim-9")
        decoded = decode(cycle.packet, device_id="sim-9")
        assert decoded == cycle.burst
        assert len(decoded.ir) == PPG_SAMPLES
        assert len(decoded.accel_x) == ACCEL_SAMPLES
        assert len(decoded.temp_wrist) == TEMP_SAMPLES

    def test_n_cycles_validation(self):
        with pytest.raises(ValueError):
            simulate_device(DeviceConfig(), n_cycles=0)
