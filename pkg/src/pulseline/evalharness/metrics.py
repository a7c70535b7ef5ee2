"""Error metrics for the estimator comparison."""

from __future__ import annotations

import numpy as np

LABELS = ("sit", "walk", "run")


class EmptyMask(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


def mae(predictions, references, valid_mask=None) -> float:
    """Mean absolute error over masked entries only."""
    pred = np.asarray(predictions, dtype=float)
    ref = np.asarray(references, dtype=float)
    if pred.shape != ref.shape:
        raise LengthMismatch(f"{pred.shape} vs {ref.shape}")
    mask = np.ones(pred.shape, dtype=bool) if valid_mask is None \
        else np.asarray(valid_mask, dtype=bool)
    if mask.shape != pred.shape:
        raise LengthMismatch(f"mask {mask.shape} vs {pred.shape}")
    if not mask.any():
        raise EmptyMask("no valid entries")
    return float(np.mean(np.abs(pred[mask] - ref[mask])))


def confusion(pred_labels, true_labels) -> tuple[np.ndarray, float]:
    """3x3 matrix (rows = truth, columns = prediction) and trace accuracy."""
    if len(pred_labels) != len(true_labels) or len(pred_labels) == 0:
        raise LengthMismatch(
            f"{len(pred_labels)} predictions vs {len(true_labels)} truths")
    matrix = np.zeros((3, 3), dtype=int)
    for pred, true in zip(pred_labels, true_labels):
        if true not in LABELS or pred not in LABELS:
            raise ValueError(f"labels must be in {LABELS}: {pred!r}, {true!r}")
        matrix[LABELS.index(true), LABELS.index(pred)] += 1
    accuracy = float(np.trace(matrix)) / float(matrix.sum())
    return matrix, accuracy


def coerce_activity_label(raw: str | None) -> str:
    """Free-text activity labels onto the closed set; unknowns map to 'sit'
    (the majority resting class) so the comparison never drops a window."""
    if not raw:
        return "sit"
    text = raw.strip().lower()
    for label in LABELS:
        if label in text:
            return label
    if any(w in text for w in ("jog", "sprint", "running")):
        return "run"
    if any(w in text for w in ("stroll", "pace", "step")):
        return "walk"
    return "sit"
