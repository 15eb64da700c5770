"""Pixel containers: 8-bit raster images and boolean masks.

Both own an immutable copy of their array so values can be shared across
sessions and threads; every operation returns a new instance. PNG is the
interchange format at all load/save boundaries because the tests need
bit-exact round trips.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import DecodeError


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    owned = np.array(array, dtype=dtype, copy=True, order="C")
    owned.setflags(write=False)
    return owned


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Row-major 8-bit samples, shape (height, width, channels), channels 1 or 3."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = self.data
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w, 1|3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        object.__setattr__(self, "data", _frozen(arr, np.uint8))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def same_pixels(self, other: "RasterImage") -> bool:
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )

    # --- PNG / file boundaries ---

    @staticmethod
    def from_bytes(raw: bytes) -> "RasterImage":
        """Decode PNG or JPEG bytes; anything undecodable raises DecodeError."""
        try:
            with Image.open(io.BytesIO(raw)) as im:
                mode = "L" if im.mode in ("1", "L", "I;16", "I") else "RGB"
                arr = np.asarray(im.convert(mode))
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise DecodeError(f"cannot decode image: {exc}") from exc
        return RasterImage(arr)

    def to_png_bytes(self) -> bytes:
        arr = self.data[:, :, 0] if self.channels == 1 else self.data
        buf = io.BytesIO()
        Image.fromarray(arr).save(buf, format="PNG")
        return buf.getvalue()

    @staticmethod
    def load(path: Union[str, Path]) -> "RasterImage":
        return RasterImage.from_bytes(Path(path).read_bytes())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_png_bytes())


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Row-major booleans, shape (height, width)."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.bits.ndim != 2:
            raise ValueError(f"expected (h, w) array, got shape {self.bits.shape}")
        object.__setattr__(self, "bits", _frozen(self.bits, bool))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.bits))

    def is_empty(self) -> bool:
        return not self.bits.any()

    def is_full(self) -> bool:
        return bool(self.bits.all())

    def matches(self, image: RasterImage) -> bool:
        return (self.height, self.width) == (image.height, image.width)

    @staticmethod
    def empty(height: int, width: int) -> "BinaryMask":
        return BinaryMask(np.zeros((height, width), dtype=bool))

    @staticmethod
    def full(height: int, width: int) -> "BinaryMask":
        return BinaryMask(np.ones((height, width), dtype=bool))

    @staticmethod
    def from_bytes(raw: bytes) -> "BinaryMask":
        """Decode a PNG bitmap; samples above 127 count as set."""
        image = RasterImage.from_bytes(raw)
        gray = image.data.mean(axis=2) if image.channels == 3 else image.data[:, :, 0]
        return BinaryMask(gray > 127)

    def to_png_bytes(self) -> bytes:
        return RasterImage(self.bits.astype(np.uint8) * 255).to_png_bytes()

    @staticmethod
    def load(path: Union[str, Path]) -> "BinaryMask":
        return BinaryMask.from_bytes(Path(path).read_bytes())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_png_bytes())
