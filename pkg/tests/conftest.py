import random

import pytest

from pulseline.wire.codec import (
    ACCEL_SAMPLES,
    PPG_SAMPLES,
    TEMP_SAMPLES,
    SensorBurst,
)


def random_burst(rng: random.Random, device_id: str = "") -> SensorBurst:
    return SensorBurst(
        ts=rng.randrange(0, 2**32),
        accel_x=[rng.randrange(-32768, 32768) for _ in range(ACCEL_SAMPLES)],
        accel_y=[rng.randrange(-32768, 32768) for _ in range(ACCEL_SAMPLES)],
        accel_z=[rng.randrange(-32768, 32768) for _ in range(ACCEL_SAMPLES)],
        ir=[rng.randrange(0, 65536) for _ in range(PPG_SAMPLES)],
        red=[rng.randrange(0, 65536) for _ in range(PPG_SAMPLES)],
        temp_wrist=[rng.randrange(0, 65536) for _ in range(TEMP_SAMPLES)],
        temp_ambient=[rng.randrange(0, 65536) for _ in range(TEMP_SAMPLES)],
        device_id=device_id,
    )


def zero_burst(ts: int = 0, device_id: str = "") -> SensorBurst:
    return SensorBurst(
        ts=ts,
        accel_x=[0] * ACCEL_SAMPLES,
        accel_y=[0] * ACCEL_SAMPLES,
        accel_z=[0] * ACCEL_SAMPLES,
        ir=[0] * PPG_SAMPLES,
        red=[0] * PPG_SAMPLES,
        temp_wrist=[0] * TEMP_SAMPLES,
        temp_ambient=[0] * TEMP_SAMPLES,
        device_id=device_id,
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
