"""Pixel-level edit operations.

All constants here (filter matrices, the brightness step, the lipstick blend
ratio, shade colors) are documented implementation choices: the functions are
named by what users ask for, and these values define what one application of
each function does. Every masked operation leaves pixels outside the mask
bit-identical.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

import numpy as np

from .. import kernels
from ..errors import (
    ChannelMismatch,
    DimensionMismatch,
    FullMask,
    MaskDimensionMismatch,
)
from .types import BinaryMask, RasterImage

# One brightness step in sample units; Whiten Skin applies +1 step, Darken
# Skin -1. Users stack steps by repeating the function.
BRIGHTNESS_STEP = 12
MAX_BRIGHTNESS_DEGREE = 10

# Chroma blend weight for lipstick recoloring; luma is preserved per pixel.
RECOLOR_RATIO = 0.6

# Everything outside the kept region after Object Retention.
RETENTION_BACKGROUND = 255

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

LIPSTICK_SHADES: dict[str, tuple[int, int, int]] = {
    "pure_red": (230, 20, 20),
    "burnt_tomato": (178, 62, 42),
    "pure_orange": (255, 120, 0),
    "rose_pink": (228, 110, 158),
    "coral": (255, 127, 80),
    "deep_plum": (110, 38, 82),
    "cherry": (200, 16, 58),
    "nude_beige": (205, 160, 130),
    "mauve": (176, 112, 140),
}


class Filter(Enum):
    GRAYSCALE = "grayscale"
    SEPIA = "sepia"
    WARM = "warm"
    COOL = "cool"
    VINTAGE = "vintage"


# Per-pixel affine transforms: out = matrix @ (r, g, b) + offset, rounded and
# clamped. Grayscale and Sepia keep a zero offset so black maps to black.
FILTER_TRANSFORMS: dict[Filter, tuple[np.ndarray, np.ndarray]] = {
    Filter.GRAYSCALE: (
        np.array([[0.299, 0.587, 0.114]] * 3),
        np.zeros(3),
    ),
    Filter.SEPIA: (
        np.array([[0.393, 0.769, 0.189], [0.349, 0.686, 0.168], [0.272, 0.534, 0.131]]),
        np.zeros(3),
    ),
    Filter.WARM: (
        np.diag([1.06, 1.01, 0.93]),
        np.array([10.0, 3.0, -10.0]),
    ),
    Filter.COOL: (
        np.diag([0.94, 1.0, 1.06]),
        np.array([-8.0, 0.0, 10.0]),
    ),
    Filter.VINTAGE: (
        np.array([[0.62, 0.32, 0.06], [0.22, 0.62, 0.16], [0.24, 0.30, 0.46]]),
        np.array([28.0, 18.0, 8.0]),
    ),
}


def _round_u8(values: np.ndarray) -> np.ndarray:
    # floor(x + 0.5): explicit half-up rounding so results are reproducible
    # across numpy versions.
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def _require_mask(image: RasterImage, mask: BinaryMask) -> None:
    if not mask.matches(image):
        raise MaskDimensionMismatch(
            f"mask {mask.height}x{mask.width} vs image {image.height}x{image.width}"
        )


def apply_filter(image: RasterImage, filter: Filter) -> RasterImage:
    """Apply one of the five photo filters to an RGB image."""
    if image.channels != 3:
        raise ChannelMismatch("filters require an RGB image")
    matrix, offset = FILTER_TRANSFORMS[filter]
    flat = image.data.reshape(-1, 3).astype(np.float64)
    out = flat @ matrix.T + offset
    return RasterImage(_round_u8(out).reshape(image.data.shape))


def adjust_brightness(
    image: RasterImage, mask: Optional[BinaryMask], degree: int
) -> RasterImage:
    """Add ``degree`` brightness steps inside the mask (whole image when no
    mask is given), clamped to the sample range."""
    if abs(degree) > MAX_BRIGHTNESS_DEGREE:
        raise ValueError(f"|degree| must be <= {MAX_BRIGHTNESS_DEGREE}")
    if degree == 0:
        return image
    shifted = np.clip(
        image.data.astype(np.int16) + degree * BRIGHTNESS_STEP, 0, 255
    ).astype(np.uint8)
    if mask is None:
        return RasterImage(shifted)
    _require_mask(image, mask)
    return RasterImage(np.where(mask.bits[:, :, None], shifted, image.data))


def recolor_region(
    image: RasterImage,
    mask: BinaryMask,
    shade: tuple[int, int, int],
    ratio: float = RECOLOR_RATIO,
) -> RasterImage:
    """Blend each masked pixel's chroma toward the shade's chroma while
    keeping that pixel's luma.

    With luma Y = 0.299 R + 0.587 G + 0.114 B, a pixel p becomes
    Y(p) + (1-ratio) * (p - Y(p)) + ratio * (shade - Y(shade)).
    """
    if image.channels != 3:
        raise ChannelMismatch("recolor requires an RGB image")
    _require_mask(image, mask)
    if mask.is_empty():
        return image

    data = image.data.astype(np.float64)
    luma = data @ _LUMA_WEIGHTS
    shade_arr = np.asarray(shade, dtype=np.float64)
    shade_chroma = shade_arr - float(shade_arr @ _LUMA_WEIGHTS)
    blended = luma[:, :, None] + (1.0 - ratio) * (data - luma[:, :, None]) + ratio * shade_chroma
    out = np.where(mask.bits[:, :, None], _round_u8(blended), image.data)
    return RasterImage(out)


def retain_object(image: RasterImage, mask: BinaryMask) -> RasterImage:
    """Keep masked pixels; everything else becomes the white background."""
    _require_mask(image, mask)
    background = np.full_like(image.data, RETENTION_BACKGROUND)
    return RasterImage(np.where(mask.bits[:, :, None], image.data, background))


def naive_inpaint(image: RasterImage, mask: BinaryMask) -> RasterImage:
    """Fill the masked region by iterative 4-neighbor mean diffusion.

    Pixels outside the mask are bit-identical to the input. The sweep count
    is bounded by height + width, asserted because it is the termination
    argument.
    """
    _require_mask(image, mask)
    if mask.is_full():
        raise FullMask("no known pixels to diffuse from")
    if mask.is_empty():
        return image
    filled, sweeps = kernels.inpaint_fill(image.data, mask.bits)
    assert sweeps <= image.height + image.width
    return RasterImage(filled)


def dilate_mask(mask: BinaryMask, radius: int) -> BinaryMask:
    """Dilate with a (2*radius+1) square structuring element; radius 0 is
    the identity."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return BinaryMask(kernels.dilate(mask.bits, radius))


def overlap_area(a: BinaryMask, b: BinaryMask) -> int:
    """Number of pixels set in both masks."""
    if (a.height, a.width) != (b.height, b.width):
        raise DimensionMismatch(f"{a.height}x{a.width} vs {b.height}x{b.width}")
    return int(np.count_nonzero(a.bits & b.bits))


def auto_contrast(image: RasterImage) -> RasterImage:
    """Linear contrast stretch of the occupied sample range to 0..255; the
    built-in stand-in for learned image enhancement."""
    data = image.data.astype(np.float64)
    lo = float(data.min())
    hi = float(data.max())
    if hi <= lo:
        return image
    stretched = (data - lo) * (255.0 / (hi - lo))
    return RasterImage(_round_u8(stretched))
