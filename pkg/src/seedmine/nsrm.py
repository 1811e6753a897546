"""Non-salient region masking for multi-category images.

Single-category images pass through untouched; for the rest, the
segmentation prediction is expanded with the pseudo label, an object mask is
extracted and dilated, and everything outside the dilated mask becomes
ignore. The dilation keeps a ring of true background around each object so
boundary evidence survives.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError
from .maps import IGNORE, ImageRecord, dilate, require_same_shape


def split_simple_complex(records) -> tuple[set[str], set[str]]:
    """Partition image ids: one present class is simple, two or more complex."""
    simple, complex_ = set(), set()
    for rec in records:
        (simple if rec.is_simple else complex_).add(rec.image_id)
    return simple, complex_


def expand_prediction(prediction: np.ndarray, pseudo: np.ndarray) -> np.ndarray:
    """Union of object regions, prediction winning conflicts.

    Where the prediction offers no class, the pseudo label's class or ignore
    value is taken; pixels background in both stay background.
    """
    require_same_shape(prediction, pseudo, "expand_prediction")
    pred_fg = (prediction != 0) & (prediction != IGNORE)
    out = np.where(pred_fg, prediction, np.where(pseudo != 0, pseudo, prediction))
    return out.astype(np.uint8)


def object_mask(labels: np.ndarray) -> np.ndarray:
    """True exactly at class pixels (background and ignore are false)."""
    return (labels != 0) & (labels != IGNORE)


def mask_label(expanded: np.ndarray, mask_dilated: np.ndarray) -> np.ndarray:
    """Keep labels inside the dilated mask, ignore everything outside."""
    require_same_shape(expanded, mask_dilated, "mask_label")
    if (object_mask(expanded) & ~mask_dilated).any():
        raise ContractError("dilated mask must cover every object pixel")
    out = np.where(mask_dilated, expanded, IGNORE)
    return out.astype(np.uint8)


def apply_masking(prediction: np.ndarray, pseudo: np.ndarray, r: int) -> np.ndarray:
    """The full masking path: expand, extract objects, dilate, mask."""
    expanded = expand_prediction(prediction, pseudo)
    return mask_label(expanded, dilate(object_mask(expanded), r))


def nsrm_apply(
    prediction: np.ndarray, pseudo: np.ndarray, record: ImageRecord, r: int = 30
) -> np.ndarray:
    """Route simple images through unchanged, mask complex ones."""
    require_same_shape(prediction, pseudo, "nsrm_apply")
    if record.is_simple:
        return pseudo.copy()
    return apply_masking(prediction, pseudo, r)
