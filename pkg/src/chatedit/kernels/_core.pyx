# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the hot pixel kernels.

Semantics of record live in ``_reference.py``; this module exists purely for
speed on large images. Output must stay bit-identical to the reference —
both use floor(sum/count + 0.5) in exact integer arithmetic.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def inpaint_fill(cnp.ndarray[cnp.uint8_t, ndim=3] values,
                 cnp.ndarray[cnp.uint8_t, ndim=2] unknown):
    """Iterative neighborhood-mean fill; see the reference implementation."""
    cdef Py_ssize_t h = values.shape[0]
    cdef Py_ssize_t w = values.shape[1]
    cdef Py_ssize_t c = values.shape[2]

    cdef cnp.ndarray[cnp.int64_t, ndim=3] work = values.astype(np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] known = np.ascontiguousarray(
        (unknown == 0).astype(np.uint8))

    coords = np.argwhere(unknown != 0).astype(np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=2] pending = np.ascontiguousarray(coords)
    cdef Py_ssize_t n_pending = pending.shape[0]

    cdef cnp.ndarray[cnp.intp_t, ndim=2] frontier = np.empty_like(pending)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] frontier_vals = np.empty(
        (n_pending, c), dtype=np.int64)
    cdef cnp.ndarray[cnp.intp_t, ndim=2] remaining = np.empty_like(pending)

    cdef Py_ssize_t sweeps = 0
    cdef Py_ssize_t i, k, y, x, n_frontier, n_remaining, cnt
    cdef cnp.int64_t s

    while n_pending > 0:
        n_frontier = 0
        n_remaining = 0
        for i in range(n_pending):
            y = pending[i, 0]
            x = pending[i, 1]
            cnt = 0
            if y > 0 and known[y - 1, x]:
                cnt += 1
            if y < h - 1 and known[y + 1, x]:
                cnt += 1
            if x > 0 and known[y, x - 1]:
                cnt += 1
            if x < w - 1 and known[y, x + 1]:
                cnt += 1
            if cnt == 0:
                remaining[n_remaining, 0] = y
                remaining[n_remaining, 1] = x
                n_remaining += 1
                continue
            for k in range(c):
                s = 0
                if y > 0 and known[y - 1, x]:
                    s += work[y - 1, x, k]
                if y < h - 1 and known[y + 1, x]:
                    s += work[y + 1, x, k]
                if x > 0 and known[y, x - 1]:
                    s += work[y, x - 1, k]
                if x < w - 1 and known[y, x + 1]:
                    s += work[y, x + 1, k]
                frontier_vals[n_frontier, k] = (2 * s + cnt) // (2 * cnt)
            frontier[n_frontier, 0] = y
            frontier[n_frontier, 1] = x
            n_frontier += 1

        if n_frontier == 0:
            raise RuntimeError("inpaint made no progress; mask must not be full")

        for i in range(n_frontier):
            y = frontier[i, 0]
            x = frontier[i, 1]
            for k in range(c):
                work[y, x, k] = frontier_vals[i, k]
            known[y, x] = 1

        pending, remaining = remaining, pending
        n_pending = n_remaining
        sweeps += 1

    return work.astype(np.uint8), sweeps


def dilate(cnp.ndarray[cnp.uint8_t, ndim=2] mask, Py_ssize_t radius):
    """Square-element dilation as two separable max passes."""
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] horizontal = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef Py_ssize_t y, x, d, lo, hi

    if radius == 0:
        return mask.copy()

    for y in range(h):
        for x in range(w):
            if mask[y, x]:
                lo = x - radius if x - radius > 0 else 0
                hi = x + radius + 1 if x + radius + 1 < w else w
                for d in range(lo, hi):
                    horizontal[y, d] = 1

    for y in range(h):
        for x in range(w):
            if horizontal[y, x]:
                lo = y - radius if y - radius > 0 else 0
                hi = y + radius + 1 if y + radius + 1 < h else h
                for d in range(lo, hi):
                    out[d, x] = 1

    return out
