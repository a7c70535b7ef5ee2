"""Benchmark dataset ingestion and 4-second windowing.

Expected layout: one CSV per recording named s<subject>_<activity>.csv
(three recordings per subject: sit, walk, run), a header row, and at least
the mapped columns. An optional dataset.json in the directory overrides the
column mapping and unit scaling, which is how the public transit-time PPG
release plugs in (see README for the mapping we assume).
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..wire.codec import PPG_SAMPLES, ACCEL_SAMPLES, TEMP_SAMPLES, SensorBurst
from .resample import downsample

ACTIVITIES = ("sit", "walk", "run")

_FILE_RE = re.compile(r"^s(\d+)_(sit|walk|run)\.csv$", re.IGNORECASE)

DEFAULT_MAPPING = {
    "time": "time",
    "ir": "pleth_2",
    "red": "pleth_1",
    "a_x": "a_x",
    "a_y": "a_y",
    "a_z": "a_z",
    "hr": "hr",
    "spo2": "spo2",
}

# unit conversion into raw-count space; identity for the synthetic dataset
DEFAULT_SCALING = {"ppg_scale": 1.0, "ppg_offset": 0.0,
                   "accel_scale": 1.0, "accel_offset": 0.0}


class MissingFile(FileNotFoundError):
    pass


class SchemaMismatch(ValueError):
    pass


@dataclass
class ReferenceRecord:
    subject_id: str
    activity: str
    fs: float
    ir: np.ndarray
    red: np.ndarray
    accel: np.ndarray          # shape (3, n)
    hr_ref: np.ndarray
    spo2_ref: np.ndarray
    source_file: str = ""
    missing_channels: list[str] = field(default_factory=list)

    @property
    def duration_s(self) -> float:
        return self.ir.size / self.fs


def _load_manifest(dataset_dir: Path) -> tuple[dict, dict]:
    mapping = dict(DEFAULT_MAPPING)
    scaling = dict(DEFAULT_SCALING)
    manifest = dataset_dir / "dataset.json"
    if manifest.exists():
        data = json.loads(manifest.read_text(encoding="utf-8"))
        mapping.update(data.get("columns", {}))
        scaling.update(data.get("scaling", {}))
    return mapping, scaling


def ingest(dataset_dir: str | Path) -> list[ReferenceRecord]:
    """Parse every recording CSV; raises MissingFile on an empty directory
    and SchemaMismatch (naming the file) on malformed content."""
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise MissingFile(f"dataset directory not found: {dataset_dir}")
    files = sorted(p for p in dataset_dir.iterdir() if _FILE_RE.match(p.name))
    if not files:
        raise MissingFile(f"no s<N>_<activity>.csv recordings in {dataset_dir}")
    mapping, scaling = _load_manifest(dataset_dir)
    records = []
    for path in files:
        match = _FILE_RE.match(path.name)
        assert match is not None
        records.append(_parse_recording(path, f"S{int(match.group(1))}",
                                        match.group(2).lower(), mapping,
                                        scaling))
    records.sort(key=lambda r: (int(r.subject_id[1:]), ACTIVITIES.index(r.activity)))
    return records


def _parse_recording(path: Path, subject_id: str, activity: str,
                     mapping: dict, scaling: dict) -> ReferenceRecord:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path.name}: empty file") from None
        required = {key: mapping[key] for key in DEFAULT_MAPPING}
        missing_channels = [col for col in required.values() if col not in header]
        hard_required = [required[k] for k in ("time", "ir", "red", "hr", "spo2")]
        hard_missing = [c for c in hard_required if c not in header]
        if hard_missing:
            raise SchemaMismatch(f"{path.name}: missing columns {hard_missing}")
        index = {col: header.index(col) for col in header}
        columns: dict[str, list[float]] = {key: [] for key in required}
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaMismatch(
                    f"{path.name}: row {line_no} has {len(row)} cells, "
                    f"expected {len(header)}")
            for key, col in required.items():
                if col not in index:
                    continue
                try:
                    columns[key].append(float(row[index[col]]))
                except ValueError:
                    raise SchemaMismatch(
                        f"{path.name}: row {line_no} column {col!r} is not "
                        f"numeric: {row[index[col]]!r}") from None

    time = np.asarray(columns["time"])
    if time.size < 3:
        raise SchemaMismatch(f"{path.name}: fewer than 3 samples")
    steps = np.diff(time)
    if np.any(steps <= 0):
        raise SchemaMismatch(f"{path.name}: time column must be increasing")
    fs = 1.0 / float(np.median(steps))

    def channel(key: str, scale: float = 1.0, offset: float = 0.0) -> np.ndarray:
        values = columns.get(key, [])
        if not values:
            return np.zeros(time.size)
        return np.asarray(values) * scale + offset

    ir = channel("ir", scaling["ppg_scale"], scaling["ppg_offset"])
    red = channel("red", scaling["ppg_scale"], scaling["ppg_offset"])
    accel = np.vstack([
        channel("a_x", scaling["accel_scale"], scaling["accel_offset"]),
        channel("a_y", scaling["accel_scale"], scaling["accel_offset"]),
        channel("a_z", scaling["accel_scale"], scaling["accel_offset"]),
    ])
    return ReferenceRecord(
        subject_id=subject_id, activity=activity, fs=fs, ir=ir, red=red,
        accel=accel, hr_ref=channel("hr"), spo2_ref=channel("spo2"),
        source_file=path.name, missing_channels=missing_channels,
    )


@dataclass
class EvalWindow:
    burst: SensorBurst
    subject_id: str
    activity: str
    window_index: int
    hr_ref: float
    spo2_ref: float


_NOMINAL_TEMP_WRIST = 3310   # hundredths of degC; dataset carries no temps
_NOMINAL_TEMP_AMBIENT = 2400


def _to_counts(values: np.ndarray, lo: int, hi: int) -> list[int]:
    return [int(v) for v in np.clip(np.round(values), lo, hi)]


def segment(record: ReferenceRecord, window_s: float = 4.0,
            ppg_rate: float = 31.0, accel_rate: float = 34.0,
            epoch_ts: int = 1_700_000_000) -> list[EvalWindow]:
    """Non-overlapping windows resampled to device rates and paired with the
    mean reference values over each window; a trailing partial is dropped."""
    per_window = int(round(window_s * record.fs))
    n_windows = int(math.floor(record.ir.size / per_window))
    windows = []
    for k in range(n_windows):
        lo, hi = k * per_window, (k + 1) * per_window
        ir = downsample(record.ir[lo:hi], record.fs, ppg_rate)[:PPG_SAMPLES]
        red = downsample(record.red[lo:hi], record.fs, ppg_rate)[:PPG_SAMPLES]
        axes = [downsample(record.accel[i, lo:hi], record.fs,
                           accel_rate)[:ACCEL_SAMPLES] for i in range(3)]
        if ir.size != PPG_SAMPLES or any(a.size != ACCEL_SAMPLES for a in axes):
            continue  # window shorter than the device frame after resampling
        burst = SensorBurst(
            ts=epoch_ts + int(k * window_s),
            accel_x=_to_counts(axes[0], -32768, 32767),
            accel_y=_to_counts(axes[1], -32768, 32767),
            accel_z=_to_counts(axes[2], -32768, 32767),
            ir=_to_counts(ir, 0, 65535),
            red=_to_counts(red, 0, 65535),
            temp_wrist=[_NOMINAL_TEMP_WRIST] * TEMP_SAMPLES,
            temp_ambient=[_NOMINAL_TEMP_AMBIENT] * TEMP_SAMPLES,
            device_id=f"eval-{record.subject_id}",
        )
        windows.append(EvalWindow(
            burst=burst, subject_id=record.subject_id,
            activity=record.activity, window_index=k,
            hr_ref=float(np.mean(record.hr_ref[lo:hi])),
            spo2_ref=float(np.mean(record.spo2_ref[lo:hi])),
        ))
    return windows


def make_synthetic_dataset(dataset_dir: str | Path, subjects: int = 2,
                           seconds: float = 24.0, fs: float = 250.0,
                           seed: int = 7) -> list[Path]:
    """Write a small dataset in the expected layout with known ground truth;
    used by the hermetic tests and the demo eval job."""
    rng = np.random.default_rng(seed)
    dataset_dir = Path(dataset_dir)
    dataset_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    profiles = {"sit": (0.0, 0.0), "walk": (2.0, 0.5), "run": (3.0, 1.5)}
    for subject in range(1, subjects + 1):
        for activity in ACTIVITIES:
            hr = float(rng.integers(60, 100))
            spo2 = float(rng.uniform(94.0, 99.0))
            n = int(seconds * fs)
            t = np.arange(n) / fs
            f = hr / 60.0
            ir = 50_000 + 2_000 * np.sin(2 * np.pi * f * t)
            # red amplitude keyed to the target spo2 through the shared quadratic
            from ..wire.synth import ratio_for_spo2
            r = ratio_for_spo2(spo2)
            red = 40_000 + (r * (2_000 / 50_000) * 40_000) * np.sin(2 * np.pi * f * t)
            osc_hz, amp_g = profiles[activity]
            a_x = amp_g * 256.0 * np.sin(2 * np.pi * osc_hz * t)
            a_y = np.zeros(n)
            a_z = np.full(n, 256.0)
            path = dataset_dir / f"s{subject}_{activity}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["time", "pleth_1", "pleth_2", "a_x", "a_y",
                                 "a_z", "hr", "spo2"])
                for i in range(n):
                    writer.writerow([
                        f"{t[i]:.6f}", f"{red[i]:.2f}", f"{ir[i]:.2f}",
                        f"{a_x[i]:.2f}", f"{a_y[i]:.2f}", f"{a_z[i]:.2f}",
                        f"{hr:.2f}", f"{spo2:.2f}",
                    ])
            paths.append(path)
    return paths
