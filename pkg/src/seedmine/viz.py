"""Label-map visualization with the standard bit-interleaved colormap."""

from __future__ import annotations

import numpy as np

from . import formats


def label_colormap(entries: int = 256) -> np.ndarray:
    """(entries, 3) uint8 colormap built by the 8-iteration bit-reversal rule.

    Index 0 is black, 1 is (128, 0, 0), and 255 works out to the usual
    (224, 224, 192) ignore color.
    """
    cmap = np.zeros((entries, 3), dtype=np.uint8)
    for i in range(entries):
        r = g = b = 0
        value = i
        for shift in range(7, -1, -1):
            r |= (value & 1) << shift
            g |= ((value >> 1) & 1) << shift
            b |= ((value >> 2) & 1) << shift
            value >>= 3
        cmap[i] = (r, g, b)
    return cmap


_CMAP = label_colormap()


def colorize(labels: np.ndarray) -> np.ndarray:
    """Map an (H, W) label array to an (H, W, 3) RGB image."""
    return _CMAP[np.asarray(labels, dtype=np.uint8)]


def write_color_label(path, labels) -> None:
    formats.write_ppm(path, colorize(labels))
