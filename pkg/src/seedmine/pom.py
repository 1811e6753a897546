"""Potential object mining: class-adaptive thresholds on the sparse attention
map turn probably-object background pixels into ignore.

Classes already present in the initial label take the median of their
attention values over those pixels; classes missing from it take the top
quartile of their attention values above the background threshold. Mined
pixels are only ever ignored, never assigned a class, so no wrong object
labels can be introduced.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .maps import AttentionStack, IGNORE, median, percentile_nearest_rank

MEDIAN_BRANCH = "median"
TOP_QUARTILE_BRANCH = "top_quartile"


@dataclass
class PomThresholds:
    """Per-class mining threshold and which branch produced it."""

    values: dict[int, float]
    branches: dict[int, str]

    def report_lines(self) -> list[str]:
        return [
            f"{c},{self.branches[c]},{self.values[c]:.6f}"
            for c in sorted(self.values)
        ]


def compute_thresholds(
    cam: AttentionStack, initial: np.ndarray, present, t_bg: float = 0.3
) -> PomThresholds:
    """Class-adaptive thresholds from the attention map and the initial label.

    A class on the top-quartile branch with no attention above t_bg gets a
    +inf sentinel (it mines nothing) and a warning.
    """
    initial = np.asarray(initial)
    if initial.shape != (cam.height, cam.width):
        raise ShapeError(
            f"initial label: expected {(cam.height, cam.width)}, got {initial.shape}"
        )
    values: dict[int, float] = {}
    branches: dict[int, str] = {}
    for c in sorted(set(present)):
        plane = cam.plane(c)
        labeled = initial == c
        if labeled.any():
            values[c] = median(plane[labeled])
            branches[c] = MEDIAN_BRANCH
        else:
            above = plane[plane > t_bg]
            branches[c] = TOP_QUARTILE_BRANCH
            if above.size == 0:
                values[c] = math.inf
                warnings.warn(
                    f"class {c}: no attention above t_bg={t_bg}, mining disabled",
                    stacklevel=2,
                )
            else:
                values[c] = percentile_nearest_rank(above, 0.75)
    return PomThresholds(values=values, branches=branches)


def mine(initial: np.ndarray, cam: AttentionStack, thresholds: PomThresholds) -> np.ndarray:
    """Relabel background pixels whose attention exceeds any class threshold
    as ignore. Foreground and existing ignore pixels are never modified."""
    initial = np.asarray(initial)
    if initial.shape != (cam.height, cam.width):
        raise ShapeError(
            f"initial label: expected {(cam.height, cam.width)}, got {initial.shape}"
        )
    hit = np.zeros(initial.shape, dtype=bool)
    for c, t in thresholds.values.items():
        if math.isinf(t):
            continue
        hit |= cam.plane(c) > t
    out = initial.copy()
    out[(initial == 0) & hit] = IGNORE
    return out
