"""Numpy implementations of the hot kernels.

Signature-compatible with the compiled module; selected when the extension
is unavailable or SEEDMINE_PURE_PYTHON is set.
"""

import numpy as np


def _window(r: int) -> range:
    # square element of side r; origin at the center for odd r, at the
    # upper-left of the central 2x2 for even r
    return range(-((r - 1) // 2), r // 2 + 1)


def _shift_or(dest: np.ndarray, src: np.ndarray, d: int, axis: int) -> None:
    """dest[i] |= src[i + d] along axis, out-of-range reads dropped."""
    n = src.shape[axis]
    if abs(d) >= n:
        return
    take = n - abs(d)
    if d >= 0:
        dst = slice(0, take)
        rd = slice(d, n)
    else:
        dst = slice(-d, n)
        rd = slice(0, take)
    if axis == 0:
        dest[dst, :] |= src[rd, :]
    else:
        dest[:, dst] |= src[:, rd]


def dilate_mask(mask: np.ndarray, r: int) -> np.ndarray:
    """Binary dilation of an (H, W) uint8 mask by an r x r square element."""
    rows = np.zeros_like(mask)
    for d in _window(r):
        _shift_or(rows, mask, d, axis=1)
    out = np.zeros_like(mask)
    for d in _window(r):
        _shift_or(out, rows, d, axis=0)
    return out


def confusion_counts(gt: np.ndarray, pred: np.ndarray, class_count: int):
    """(C+1)x(C+1) confusion over pixels with gt != 255.

    Prediction-ignore pixels are excluded from the matrix and returned as a
    separate tally.
    """
    scored = gt != 255
    excluded = int(np.count_nonzero(scored & (pred == 255)))
    scored &= pred != 255
    n = class_count + 1
    flat = gt[scored].astype(np.int64) * n + pred[scored].astype(np.int64)
    counts = np.bincount(flat, minlength=n * n).reshape(n, n)
    return counts, excluded
