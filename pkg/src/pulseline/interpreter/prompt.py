"""Prompt construction for the waveform interpreter.

The instruction block is fixed; the burst's channels are appended as
compact decimal arrays with their sampling rates declared. Values are
serialized as numbers only, so no burst content can alter the instructions.
"""

from __future__ import annotations

from ..wire.codec import SensorBurst

INSTRUCTION_BLOCK = """\
You will receive ir and red ppg data at 31 Hz, and a_x, a_y, a_z \
accelerometer data at 34 Hz, as well as body and ambient temperature data \
at 1 Hz.

Return the heart rate and SpO2 values you think it represents, along with \
an activity label. Also include one sentence suggesting what kind of \
activity the user might be doing, as "activity_verbose".

Return the temperatures too. Body temperature is taken at the wrist \
(extremity, not core), so adjust if necessary. If data are invalid, \
return "N/A".

Return a JSON object as the response. Focus on outlying data."""


def _ints(values) -> str:
    return "[" + ", ".join(str(int(v)) for v in values) + "]"


def _temps(values_hundredths) -> str:
    # hundredths of degC on the wire; one decimal place is enough precision
    # and keeps the prompt short
    return "[" + ", ".join(f"{int(v) / 100:.1f}" for v in values_hundredths) + "]"


def build_prompt(burst: SensorBurst) -> str:
    burst.validate()
    channels = "\n".join([
        f"ir (31 Hz): {_ints(burst.ir)}",
        f"red (31 Hz): {_ints(burst.red)}",
        f"a_x (34 Hz): {_ints(burst.accel_x)}",
        f"a_y (34 Hz): {_ints(burst.accel_y)}",
        f"a_z (34 Hz): {_ints(burst.accel_z)}",
        f"body (1 Hz): {_temps(burst.temp_wrist)}",
        f"ambient (1 Hz): {_temps(burst.temp_ambient)}",
    ])
    return f"{INSTRUCTION_BLOCK}\n\n{channels}\n"
