"""Dataset replay harness: two-path comparison, metrics, reports, figures."""

from .compare import (
    REFERENCE_COMPARISON,
    ComparisonReport,
    WindowResult,
    evaluate_windows,
    run_comparison,
    summarize,
    write_report,
)
from .dataset import (
    EvalWindow,
    MissingFile,
    ReferenceRecord,
    SchemaMismatch,
    ingest,
    make_synthetic_dataset,
    segment,
)
from .metrics import EmptyMask, LengthMismatch, coerce_activity_label, confusion, mae
from .resample import InvalidRate, downsample

__all__ = [
    "ComparisonReport",
    "EmptyMask",
    "EvalWindow",
    "InvalidRate",
    "LengthMismatch",
    "MissingFile",
    "REFERENCE_COMPARISON",
    "ReferenceRecord",
    "SchemaMismatch",
    "WindowResult",
    "coerce_activity_label",
    "confusion",
    "downsample",
    "evaluate_windows",
    "ingest",
    "mae",
    "make_synthetic_dataset",
    "run_comparison",
    "segment",
    "summarize",
    "write_report",
]
