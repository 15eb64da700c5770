"""Parity between the compiled kernel core and the numpy reference.

The two implementations must be bit-identical; the acceptance of either
backend at import time relies on it.
"""

from __future__ import annotations

import importlib

import numpy as np
import pytest

from chatedit import kernels
from chatedit.kernels import _reference

# direct submodule import so parity runs regardless of the selection mode
try:
    _core = importlib.import_module("chatedit.kernels._core")
except ImportError:  # extension not built
    _core = None

from conftest import random_image, random_mask

needs_core = pytest.mark.skipif(_core is None, reason="compiled kernels not built")


def test_selected_backend_reported():
    assert kernels.BACKEND in ("compiled", "reference")


@needs_core
def test_inpaint_parity_on_random_instances(rng):
    for _ in range(40):
        h, w = int(rng.integers(3, 24)), int(rng.integers(3, 24))
        channels = int(rng.choice([1, 3]))
        image = random_image(rng, h, w, channels)
        mask = random_mask(rng, h, w, density=float(rng.uniform(0.05, 0.7)))
        if mask.is_full():
            continue
        ref_out, ref_sweeps = _reference.inpaint_fill(image.data, mask.bits)
        core_out, core_sweeps = _core.inpaint_fill(
            image.data, mask.bits.astype(np.uint8)
        )
        assert np.array_equal(ref_out, core_out)
        assert ref_sweeps == core_sweeps


@needs_core
def test_inpaint_parity_on_structured_masks(rng):
    image = random_image(rng, 32, 32)
    bits = np.zeros((32, 32), dtype=bool)
    bits[8:24, 8:24] = True  # solid block: many sweeps
    ref_out, _ = _reference.inpaint_fill(image.data, bits)
    core_out, _ = _core.inpaint_fill(image.data, bits.astype(np.uint8))
    assert np.array_equal(ref_out, core_out)


@needs_core
def test_dilate_parity_on_random_instances(rng):
    for _ in range(60):
        h, w = int(rng.integers(1, 24)), int(rng.integers(1, 24))
        mask = random_mask(rng, h, w, density=float(rng.uniform(0.0, 0.6)))
        radius = int(rng.integers(0, 5))
        ref = _reference.dilate(mask.bits, radius)
        core = _core.dilate(mask.bits.astype(np.uint8), radius).astype(bool)
        assert np.array_equal(ref, core)


def test_reference_inpaint_progresses_monotonically(rng):
    # the known set strictly grows: sweep count bounded by one boundary layer
    # per sweep even for worst-case solid regions
    image = random_image(rng, 16, 16)
    bits = np.zeros((16, 16), dtype=bool)
    bits[2:14, 2:14] = True
    _, sweeps = _reference.inpaint_fill(image.data, bits)
    assert sweeps == 6  # 12x12 block fills from all sides: ceil(12/2) layers
