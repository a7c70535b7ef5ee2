"""Two-path comparison: model-based estimates vs the conventional baseline
over a windowed dataset, with plot-ready CSV series and reference metadata."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import DspSettings, InterpreterSettings
from ..dsp.activity import classify_activity_baseline
from ..dsp.vitals import ConventionalEstimator
from ..interpreter.client import ClientUnavailable, ModelClient
from ..interpreter.parse import MalformedReply, VitalEstimate
from ..interpreter.service import interpret
from .dataset import EvalWindow, ingest, segment
from .metrics import coerce_activity_label, confusion, mae

# Benchmark figures reported by the original study on the public
# transit-time PPG dataset. The preprocessing that produced its 1003
# evaluable traces is unpublished, so these are juxtaposed in reports and
# never asserted.
REFERENCE_COMPARISON = {
    "n_traces": 1003,
    "hr_mae_bpm": {"conventional": 22.49, "llm": 11.96},
    "spo2_mae_pct": {"conventional": 2.30, "llm": 1.39},
    "availability_pct": {"conventional": 70.29, "llm": 100.00},
    "activity_accuracy_pct": {"conventional": 32.80, "llm": 38.48},
}


@dataclass
class WindowResult:
    subject_id: str
    activity: str
    window_index: int
    hr_ref: float
    spo2_ref: float
    conv_hr: float | None
    conv_spo2: float | None
    conv_valid: bool
    conv_activity: str
    llm_hr: float | None
    llm_spo2: float | None
    llm_activity: str
    llm_recorded: bool


@dataclass
class ComparisonReport:
    n_records: int
    n_windows: int
    metrics: dict
    per_subject: dict
    confusion_conv: list[list[int]]
    confusion_llm: list[list[int]]
    error_bins: dict
    reference: dict = field(default_factory=lambda: json.loads(
        json.dumps(REFERENCE_COMPARISON)))
    results: list[WindowResult] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "computed": {
                "n_records": self.n_records,
                "n_windows": self.n_windows,
                **self.metrics,
            },
            "reference": self.reference,
            "per_subject": self.per_subject,
            "confusion": {"conventional": self.confusion_conv,
                          "llm": self.confusion_llm},
            "error_bins": self.error_bins,
        }


def _safe_mae(pairs: list[tuple[float, float]]) -> float | None:
    if not pairs:
        return None
    return float(np.mean([abs(p - r) for p, r in pairs]))


def evaluate_windows(windows: list[EvalWindow], client: ModelClient,
                     dsp_settings: DspSettings | None = None,
                     interp_settings: InterpreterSettings | None = None
                     ) -> list[WindowResult]:
    estimator = ConventionalEstimator(dsp_settings or DspSettings())
    results: list[WindowResult] = []
    for window in windows:
        conv = estimator.estimate(window.burst)
        conv_activity = classify_activity_baseline(
            [window.burst.accel_x, window.burst.accel_y, window.burst.accel_z],
            dsp_settings)
        try:
            llm: VitalEstimate | None = interpret(
                window.burst, client, settings=interp_settings)
        except (MalformedReply, ClientUnavailable):
            llm = None  # recorded as unavailable-from-llm, never dropped
        results.append(WindowResult(
            subject_id=window.subject_id, activity=window.activity,
            window_index=window.window_index, hr_ref=window.hr_ref,
            spo2_ref=window.spo2_ref,
            conv_hr=conv.hr_bpm, conv_spo2=conv.spo2_pct,
            conv_valid=conv.hr_valid and conv.spo2_valid,
            conv_activity=conv_activity,
            llm_hr=None if llm is None else llm.hr,
            llm_spo2=None if llm is None else llm.spo2,
            llm_activity=coerce_activity_label(
                None if llm is None else llm.activity),
            llm_recorded=llm is not None,
        ))
    return results


def _error_bins(errors: list[float], edges: np.ndarray) -> list[int]:
    hist, _ = np.histogram(errors, bins=edges)
    return hist.astype(int).tolist()


def summarize(results: list[WindowResult], n_records: int) -> ComparisonReport:
    conv_hr = [(r.conv_hr, r.hr_ref) for r in results
               if r.conv_hr is not None]
    conv_spo2 = [(r.conv_spo2, r.spo2_ref) for r in results
                 if r.conv_spo2 is not None]
    llm_hr = [(r.llm_hr, r.hr_ref) for r in results if r.llm_hr is not None]
    llm_spo2 = [(r.llm_spo2, r.spo2_ref) for r in results
                if r.llm_spo2 is not None]

    n = len(results)
    conv_avail = 100.0 * sum(r.conv_valid for r in results) / n if n else 0.0
    llm_avail = 100.0 * sum(
        r.llm_hr is not None and r.llm_spo2 is not None for r in results) / n \
        if n else 0.0

    truths = [r.activity for r in results]
    conv_matrix, conv_acc = confusion([r.conv_activity for r in results], truths)
    llm_matrix, llm_acc = confusion([r.llm_activity for r in results], truths)

    per_subject: dict = {}
    for r in results:
        per_subject.setdefault(r.subject_id, []).append(r)
    subject_rows = {}
    for subject_id, rows in sorted(per_subject.items()):
        subject_rows[subject_id] = {
            "conv_hr_mae": _safe_mae([(r.conv_hr, r.hr_ref) for r in rows
                                      if r.conv_hr is not None]),
            "llm_hr_mae": _safe_mae([(r.llm_hr, r.hr_ref) for r in rows
                                     if r.llm_hr is not None]),
            "conv_spo2_mae": _safe_mae([(r.conv_spo2, r.spo2_ref) for r in rows
                                        if r.conv_spo2 is not None]),
            "llm_spo2_mae": _safe_mae([(r.llm_spo2, r.spo2_ref) for r in rows
                                       if r.llm_spo2 is not None]),
            "n_windows": len(rows),
        }

    hr_edges = np.linspace(0.0, 60.0, 25)
    spo2_edges = np.linspace(0.0, 10.0, 21)
    error_bins = {
        "hr_bin_edges": hr_edges.tolist(),
        "hr_conventional": _error_bins([abs(p - r) for p, r in conv_hr], hr_edges),
        "hr_llm": _error_bins([abs(p - r) for p, r in llm_hr], hr_edges),
        "spo2_bin_edges": spo2_edges.tolist(),
        "spo2_conventional": _error_bins([abs(p - r) for p, r in conv_spo2],
                                         spo2_edges),
        "spo2_llm": _error_bins([abs(p - r) for p, r in llm_spo2], spo2_edges),
    }

    metrics = {
        # conventional errors are computed on its valid windows only
        "hr_mae_bpm": {"conventional": _safe_mae(conv_hr),
                       "llm": _safe_mae(llm_hr)},
        "spo2_mae_pct": {"conventional": _safe_mae(conv_spo2),
                         "llm": _safe_mae(llm_spo2)},
        "availability_pct": {"conventional": conv_avail, "llm": llm_avail},
        "activity_accuracy_pct": {"conventional": 100.0 * conv_acc,
                                  "llm": 100.0 * llm_acc},
        "coverage": {"windows": n,
                     "llm_recorded": sum(r.llm_recorded for r in results)},
    }
    return ComparisonReport(
        n_records=n_records, n_windows=n, metrics=metrics,
        per_subject=subject_rows,
        confusion_conv=conv_matrix.tolist(), confusion_llm=llm_matrix.tolist(),
        error_bins=error_bins, results=results,
    )


def run_comparison(dataset_dir: str | Path, client: ModelClient,
                   out_dir: str | Path | None = None,
                   dsp_settings: DspSettings | None = None,
                   interp_settings: InterpreterSettings | None = None,
                   render_figures: bool = True) -> ComparisonReport:
    """Replay the dataset through both estimator paths; optionally write
    report.json, the plot-ready CSVs, and the rendered figures."""
    records = ingest(dataset_dir)
    windows: list[EvalWindow] = []
    for record in records:  # ingest() already ordered by subject, activity
        windows.extend(segment(record))
    results = evaluate_windows(windows, client, dsp_settings, interp_settings)
    report = summarize(results, n_records=len(records))
    if out_dir is not None:
        write_report(report, out_dir, render_figures=render_figures)
    return report


def write_report(report: ComparisonReport, out_dir: str | Path,
                 render_figures: bool = True) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["report"] = out_dir / "report.json"
    paths["report"].write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")

    paths["per_subject"] = out_dir / "per_subject_deltas.csv"
    with paths["per_subject"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "conv_hr_mae", "llm_hr_mae",
                         "conv_spo2_mae", "llm_spo2_mae", "n_windows"])
        for subject_id, row in report.per_subject.items():
            writer.writerow([
                subject_id,
                *("" if row[k] is None else f"{row[k]:.6f}"
                  for k in ("conv_hr_mae", "llm_hr_mae", "conv_spo2_mae",
                            "llm_spo2_mae")),
                row["n_windows"],
            ])

    paths["error_density"] = out_dir / "error_density.csv"
    bins = report.error_bins
    with paths["error_density"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "bin_low", "bin_high", "conventional", "llm"])
        for metric, edges_key in (("hr", "hr_bin_edges"),
                                  ("spo2", "spo2_bin_edges")):
            edges = bins[edges_key]
            for i in range(len(edges) - 1):
                writer.writerow([
                    metric, f"{edges[i]:.4f}", f"{edges[i + 1]:.4f}",
                    bins[f"{metric}_conventional"][i], bins[f"{metric}_llm"][i],
                ])

    paths["confusion"] = out_dir / "confusion.csv"
    with paths["confusion"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "truth", "pred_sit", "pred_walk", "pred_run"])
        for method, matrix in (("conventional", report.confusion_conv),
                               ("llm", report.confusion_llm)):
            for label, row in zip(("sit", "walk", "run"), matrix):
                writer.writerow([method, label, *row])

    paths["per_burst"] = out_dir / "per_burst.csv"
    with paths["per_burst"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "activity", "window_index", "hr_ref",
                         "spo2_ref", "conv_hr", "conv_spo2", "conv_valid",
                         "conv_activity", "llm_hr", "llm_spo2", "llm_activity"])
        for r in report.results:
            writer.writerow([
                r.subject_id, r.activity, r.window_index,
                f"{r.hr_ref:.4f}", f"{r.spo2_ref:.4f}",
                "" if r.conv_hr is None else f"{r.conv_hr:.4f}",
                "" if r.conv_spo2 is None else f"{r.conv_spo2:.4f}",
                int(r.conv_valid), r.conv_activity,
                "" if r.llm_hr is None else f"{r.llm_hr:.4f}",
                "" if r.llm_spo2 is None else f"{r.llm_spo2:.4f}",
                r.llm_activity,
            ])

    if render_figures:
        from .figures import render_comparison_figures
        paths.update(render_comparison_figures(report, out_dir))
    return paths
