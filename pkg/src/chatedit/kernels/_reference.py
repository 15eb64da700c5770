"""Numpy implementations of the hot pixel kernels.

These are the semantics of record: the compiled twin in ``_core.pyx`` must
produce bit-identical output (asserted by the parity tests). Arithmetic is
integer-exact — fill values are floor(sum/count + 0.5), computed as
(2*sum + count) // (2*count) so no float rounding can diverge between the
two implementations.
"""

from __future__ import annotations

import numpy as np


def inpaint_fill(values: np.ndarray, unknown: np.ndarray) -> tuple[np.ndarray, int]:
    """Iterative neighborhood-mean fill.

    Each sweep fills every unknown pixel that has at least one known
    4-neighbor with the rounded mean of those neighbors, using only values
    known before the sweep started. Filled pixels become known; the region
    shrinks one boundary layer per sweep until nothing is unknown.

    ``values``: (h, w, c) uint8. ``unknown``: (h, w) bool with at least one
    False. Returns (filled uint8 array, sweep count).
    """
    h, w, _ = values.shape
    work = values.astype(np.int64)
    known = ~unknown
    sweeps = 0
    while not known.all():
        sums = np.zeros_like(work)
        counts = np.zeros((h, w), dtype=np.int64)
        known_i = known.astype(np.int64)
        contrib = work * known_i[:, :, None]

        sums[1:, :] += contrib[:-1, :]
        counts[1:, :] += known_i[:-1, :]
        sums[:-1, :] += contrib[1:, :]
        counts[:-1, :] += known_i[1:, :]
        sums[:, 1:] += contrib[:, :-1]
        counts[:, 1:] += known_i[:, :-1]
        sums[:, :-1] += contrib[:, 1:]
        counts[:, :-1] += known_i[:, 1:]

        frontier = ~known & (counts > 0)
        if not frontier.any():
            raise RuntimeError("inpaint made no progress; mask must not be full")
        c = counts[frontier][:, None]
        work[frontier] = (2 * sums[frontier] + c) // (2 * c)
        known |= frontier
        sweeps += 1
    return work.astype(np.uint8), sweeps


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Morphological dilation with a (2r+1) square structuring element,
    done as two separable 1-D max passes. ``mask``: (h, w) bool."""
    if radius == 0:
        return mask.copy()
    horizontal = mask.copy()
    for d in range(1, radius + 1):
        horizontal[:, d:] |= mask[:, :-d]
        horizontal[:, :-d] |= mask[:, d:]
    out = horizontal.copy()
    for d in range(1, radius + 1):
        out[d:, :] |= horizontal[:-d, :]
        out[:-d, :] |= horizontal[d:, :]
    return out
