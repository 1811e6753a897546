"""Background extraction: fuse accumulated attention with saliency into the
initial per-pixel label."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, ShapeError
from .maps import IGNORE, AttentionStack


def background_extract(
    oacam: AttentionStack,
    saliency: np.ndarray,
    present,
    t_bg: float = 0.3,
    t_sal: float = 0.5,
) -> np.ndarray:
    """Initial label from accumulated attention plus saliency.

    Saliency supplies the background cue: pixels below t_sal become
    background (0) no matter how strongly attention fires there, which is
    exactly the deficiency the mining stage repairs. Salient pixels take the
    argmax class when its attention reaches t_bg (ties to the smallest class
    id) and ignore (255) otherwise.
    """
    if not 0.0 < t_bg < 1.0 or not 0.0 < t_sal < 1.0:
        raise ParameterError(f"thresholds must lie in (0, 1), got t_bg={t_bg}, t_sal={t_sal}")
    classes = sorted(set(present))
    if not classes:
        raise ParameterError("present class set is empty")
    if classes[0] < 1 or classes[-1] > oacam.class_count:
        raise ParameterError(f"present classes {classes} outside 1..{oacam.class_count}")
    saliency = np.asarray(saliency)
    if saliency.shape != (oacam.height, oacam.width):
        raise ShapeError(
            f"saliency: expected {(oacam.height, oacam.width)}, got {saliency.shape}"
        )
    planes = oacam.values[[c - 1 for c in classes]]
    strength = planes.max(axis=0)
    # argmax picks the first (smallest) class id on ties
    winner = np.asarray(classes, dtype=np.uint8)[planes.argmax(axis=0)]

    labels = np.zeros(saliency.shape, dtype=np.uint8)
    salient = saliency >= t_sal
    explained = strength >= t_bg
    labels[salient & explained] = winner[salient & explained]
    labels[salient & ~explained] = IGNORE
    return labels
