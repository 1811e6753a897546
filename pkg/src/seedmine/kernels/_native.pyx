# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: binary dilation and confusion accumulation."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dilate_mask(mask, int r):
    """Binary dilation of an (H, W) uint8 mask by an r x r square element.

    Separable sliding-window counts give O(HW) independent of r, with
    row-major access in both passes.
    """
    cdef cnp.uint8_t[:, ::1] src = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    # origin at the center for odd r, upper-left of the central 2x2 for even r
    cdef Py_ssize_t lo = -((r - 1) // 2)
    cdef Py_ssize_t hi = r // 2
    rows_arr = np.zeros((h, w), dtype=np.uint8)
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] rows = rows_arr
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cnt_arr = np.zeros(w, dtype=np.int32)
    cdef cnp.int32_t[::1] cnt = cnt_arr
    cdef Py_ssize_t y, x, d, enter, leave
    cdef Py_ssize_t run

    # horizontal pass: rows[y, x] = any(src[y, x+lo : x+hi+1])
    for y in range(h):
        run = 0
        d = hi if hi < w - 1 else w - 1
        for x in range(0, d + 1):
            run += src[y, x]
        rows[y, 0] = run > 0
        for x in range(1, w):
            enter = x + hi
            if enter < w:
                run += src[y, enter]
            leave = x - 1 + lo
            if leave >= 0:
                run -= src[y, leave]
            rows[y, x] = run > 0

    # vertical pass with per-column window counts, still row-major
    d = hi if hi < h - 1 else h - 1
    for y in range(0, d + 1):
        for x in range(w):
            cnt[x] += rows[y, x]
    for x in range(w):
        out[0, x] = cnt[x] > 0
    for y in range(1, h):
        enter = y + hi
        if enter < h:
            for x in range(w):
                cnt[x] += rows[enter, x]
        leave = y - 1 + lo
        if leave >= 0:
            for x in range(w):
                cnt[x] -= rows[leave, x]
        for x in range(w):
            out[y, x] = cnt[x] > 0
    return out_arr


def confusion_counts(gt, pred, int class_count):
    """(C+1)x(C+1) confusion over pixels with gt != 255.

    Prediction-ignore pixels are excluded from the matrix and returned as a
    separate tally.
    """
    cdef cnp.uint8_t[:, ::1] g = np.ascontiguousarray(gt, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] p = np.ascontiguousarray(pred, dtype=np.uint8)
    cdef Py_ssize_t h = g.shape[0]
    cdef Py_ssize_t w = g.shape[1]
    counts_arr = np.zeros((class_count + 1, class_count + 1), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    cdef Py_ssize_t excluded = 0
    cdef Py_ssize_t y, x
    cdef int gv, pv

    for y in range(h):
        for x in range(w):
            gv = g[y, x]
            if gv == 255:
                continue
            pv = p[y, x]
            if pv == 255:
                excluded += 1
            else:
                counts[gv, pv] += 1
    return counts_arr, excluded
