"""Attention-map accumulation across training snapshots.

A single attention map localizes only the strongest evidence; the running
element-wise maximum over snapshots keeps every region that was ever
activated, trading precision for recall.
"""

from __future__ import annotations

from .errors import ParameterError, ShapeError
from .grunit import FeatureGrid, GrParams, classify
from .maps import AttentionStack, normalize

import numpy as np


def accumulate(previous: AttentionStack | None, current: AttentionStack) -> AttentionStack:
    """Element-wise running maximum of normalized stacks."""
    if not current.normalized:
        raise ParameterError("current stack must be normalized")
    if previous is None:
        return AttentionStack(current.values.copy(), normalized=True)
    if not previous.normalized:
        raise ParameterError("previous stack must be normalized")
    if previous.values.shape != current.values.shape:
        raise ShapeError(
            f"accumulate: expected shape {previous.values.shape}, "
            f"got {current.values.shape}"
        )
    return AttentionStack(np.maximum(previous.values, current.values), normalized=True)


def snapshot_series(
    params_series: list[GrParams], x: FeatureGrid
) -> tuple[AttentionStack, AttentionStack]:
    """Final-snapshot attention map and the accumulated map over all snapshots.

    Each snapshot's map is normalized before accumulation and the
    accumulated result is re-normalized at the end.
    """
    if not params_series:
        raise ParameterError("params series must be non-empty")
    acc = None
    cam = None
    for params in params_series:
        _, raw = classify(params, x)
        cam = normalize(raw)
        acc = accumulate(acc, cam)
    return cam, normalize(acc)
