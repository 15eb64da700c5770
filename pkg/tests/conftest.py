from __future__ import annotations

import numpy as np
import pytest

from chatedit.executors import default_catalog, default_registry
from chatedit.imaging import BinaryMask, RasterImage


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_image(rng: np.random.Generator, h: int, w: int, channels: int = 3) -> RasterImage:
    return RasterImage(rng.integers(0, 256, size=(h, w, channels), dtype=np.uint8))


def random_mask(rng: np.random.Generator, h: int, w: int, density: float = 0.3) -> BinaryMask:
    return BinaryMask(rng.random((h, w)) < density)
