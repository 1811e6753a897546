"""Core map types and array primitives used by every pipeline stage.

Label maps and saliency maps are plain numpy arrays ((H, W) uint8 and
(H, W) float32 in [0, 1]); attention stacks carry a normalization flag, so
they get a small wrapper type.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import formats, kernels
from .errors import ParameterError, ShapeError

IGNORE = 255  # label value excluded from training losses and metrics


@dataclass
class AttentionStack:
    """Per-class non-negative attention planes, shape (C, H, W).

    ``normalized`` records that each plane has been min-max scaled to [0, 1]
    (plane c holds class id c + 1).
    """

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 3:
            raise ShapeError(f"attention stack must be (C, H, W), got {self.values.shape}")
        if min(self.values.shape) == 0:
            raise ShapeError(f"attention stack has empty dimension: {self.values.shape}")
        if self.normalized and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ParameterError("normalized stack has values outside [0, 1]")

    @property
    def class_count(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    def plane(self, class_id: int) -> np.ndarray:
        if not 1 <= class_id <= self.class_count:
            raise ParameterError(f"class id {class_id} outside 1..{self.class_count}")
        return self.values[class_id - 1]

    def save(self, path) -> None:
        formats.write_fmap(path, self.values)

    @classmethod
    def load(cls, path, normalized: bool = False) -> "AttentionStack":
        return cls(formats.read_fmap(path), normalized=normalized)


@dataclass(frozen=True)
class ImageRecord:
    """Image id plus its image-level label (set of present foreground classes)."""

    image_id: str
    present_classes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        classes = tuple(sorted(self.present_classes))
        if not classes:
            raise ParameterError(f"{self.image_id}: empty class set")
        if len(set(classes)) != len(classes):
            raise ParameterError(f"{self.image_id}: duplicate class ids")
        if classes[0] < 1:
            raise ParameterError(f"{self.image_id}: class ids must be >= 1")
        object.__setattr__(self, "present_classes", classes)

    @property
    def is_simple(self) -> bool:
        return len(self.present_classes) == 1


def normalize(stack: AttentionStack) -> AttentionStack:
    """Min-max scale each class plane to [0, 1] independently.

    Constant planes map to all-zero (nothing activated). Idempotent.
    """
    values = stack.values
    if values.min() < 0.0:
        raise ParameterError("attention values must be non-negative")
    lo = values.min(axis=(1, 2), keepdims=True)
    hi = values.max(axis=(1, 2), keepdims=True)
    span = hi - lo
    out = np.zeros_like(values)
    np.divide(values - lo, span, out=out, where=span > 0)
    return AttentionStack(out, normalized=True)


def percentile_nearest_rank(values, q: float) -> float:
    """Nearest-rank percentile: sorted_ascending[ceil(q * n) - 1]."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ParameterError("empty value multiset")
    if not 0.0 < q <= 1.0:
        raise ParameterError(f"q must lie in (0, 1], got {q}")
    arr = np.sort(arr)
    rank = int(np.ceil(q * arr.size))
    return float(arr[rank - 1])


def median(values) -> float:
    """Statistical median: mean of the two middle elements for even counts."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ParameterError("empty value multiset")
    arr = np.sort(arr)
    mid = arr.size // 2
    if arr.size % 2:
        return float(arr[mid])
    return float((arr[mid - 1] + arr[mid]) / 2.0)


def dilate(mask: np.ndarray, r: int) -> np.ndarray:
    """Dilate a boolean (H, W) mask by an r x r square structuring element.

    Origin at the center for odd r, at the upper-left of the central 2x2 for
    even r; the element is clipped at image borders.
    """
    if r < 1:
        raise ParameterError(f"kernel size must be >= 1, got {r}")
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ShapeError(f"mask must be (H, W), got shape {arr.shape}")
    out = kernels.dilate_mask(np.ascontiguousarray(arr, dtype=np.uint8), int(r))
    return np.asarray(out).astype(bool)


def check_label_map(labels: np.ndarray, class_count: int) -> None:
    """Raise unless every label is 0, a class id <= class_count, or 255."""
    bad = (labels > class_count) & (labels != IGNORE)
    if bad.any():
        value = int(labels[bad][0])
        raise ParameterError(
            f"invalid label {value} (class_count={class_count}, ignore={IGNORE})"
        )


def require_same_shape(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what}: expected shape {a.shape}, got {b.shape}")
