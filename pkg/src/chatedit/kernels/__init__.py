"""Hot pixel kernels with backend selection at import time.

The Cython core is used for the iterative inpaint fill when its extension
built — the frontier-based loop beats full-frame numpy sweeps by 20-160x on
realistic hole sizes (see benchmarks/bench_kernels.py). Dilation stays on
the numpy separable-shift implementation even when the extension is present,
because the benchmark shows vectorized boolean shifts outrun the compiled
per-pixel loop about 3x.

Set ``CHATEDIT_KERNELS=reference`` to force pure numpy everywhere, or
``CHATEDIT_KERNELS=compiled`` to force the extension for every kernel
(raises if it is missing). Both backends are bit-identical by contract;
``tests/test_kernels.py`` asserts parity.
"""

from __future__ import annotations

import os

import numpy as np

from . import _reference

_FORCED = os.environ.get("CHATEDIT_KERNELS", "").strip().lower()

if _FORCED == "reference":
    _core = None
else:
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        if _FORCED == "compiled":
            raise
        _core = None

BACKEND = "compiled" if _core is not None else "reference"
# auto mode: compiled inpaint, numpy dilate; forcing overrides per-kernel choice
_INPAINT_COMPILED = _core is not None
_DILATE_COMPILED = _core is not None and _FORCED == "compiled"


def inpaint_fill(values: np.ndarray, unknown: np.ndarray) -> tuple[np.ndarray, int]:
    """Fill ``unknown`` pixels of ``values`` by iterative neighbor-mean
    diffusion; returns (filled array, sweep count)."""
    values = np.ascontiguousarray(values, dtype=np.uint8)
    if _INPAINT_COMPILED:
        unknown8 = np.ascontiguousarray(unknown, dtype=np.uint8)
        return _core.inpaint_fill(values, unknown8)
    return _reference.inpaint_fill(values, np.asarray(unknown, dtype=bool))


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Dilate a boolean mask with a (2*radius+1) square element."""
    if _DILATE_COMPILED:
        mask8 = np.ascontiguousarray(mask, dtype=np.uint8)
        return _core.dilate(mask8, radius).astype(bool)
    return _reference.dilate(np.asarray(mask, dtype=bool), radius)
