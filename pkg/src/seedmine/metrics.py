"""Segmentation quality metrics: confusion matrix, per-class IoU and mIoU,
and pseudo-label error rates against ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import MetricError
from .maps import IGNORE, check_label_map, require_same_shape


def confusion(gt: np.ndarray, pred: np.ndarray, class_count: int) -> tuple[np.ndarray, int]:
    """(C+1)x(C+1) pixel counts over gt != 255, plus the tally of pixels the
    prediction marked ignore (those are excluded from the matrix)."""
    gt = np.asarray(gt)
    pred = np.asarray(pred)
    require_same_shape(gt, pred, "confusion")
    check_label_map(gt, class_count)
    check_label_map(pred, class_count)
    counts, excluded = kernels.confusion_counts(
        np.ascontiguousarray(gt, dtype=np.uint8),
        np.ascontiguousarray(pred, dtype=np.uint8),
        int(class_count),
    )
    return np.asarray(counts), int(excluded)


def miou(counts: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-class IoU (NaN where gt and prediction are both empty) and the
    mean over the defined classes."""
    counts = np.asarray(counts, dtype=np.float64)
    tp = np.diag(counts)
    union = counts.sum(axis=0) + counts.sum(axis=1) - tp
    ious = np.full(counts.shape[0], np.nan)
    defined = union > 0
    if not defined.any():
        raise MetricError("IoU undefined: every class has an empty union")
    ious[defined] = tp[defined] / union[defined]
    return ious, float(ious[defined].mean())


@dataclass(frozen=True)
class PseudoLabelRates:
    false_negative: float   # gt object pixels labeled background
    false_positive: float   # gt background pixels labeled as some class
    ignore_fraction: float  # pixels labeled ignore


def pseudo_label_rates(gt: np.ndarray, pseudo: np.ndarray) -> PseudoLabelRates:
    """Error rates of a pseudo label. Ignore pixels count toward neither the
    false-negative nor the false-positive rate."""
    gt = np.asarray(gt)
    pseudo = np.asarray(pseudo)
    require_same_shape(gt, pseudo, "pseudo_label_rates")
    gt_object = (gt != 0) & (gt != IGNORE)
    gt_background = gt == 0
    pseudo_fg = (pseudo != 0) & (pseudo != IGNORE)
    fnr = float((pseudo[gt_object] == 0).mean()) if gt_object.any() else 0.0
    fpr = float(pseudo_fg[gt_background].mean()) if gt_background.any() else 0.0
    return PseudoLabelRates(
        false_negative=fnr,
        false_positive=fpr,
        ignore_fraction=float((pseudo == IGNORE).mean()),
    )
