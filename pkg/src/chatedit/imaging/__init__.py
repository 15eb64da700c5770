"""Pixel types, edit operations and quality metrics."""

from .metrics import PSNR_CAP, psnr, ssim
from .ops import (
    BRIGHTNESS_STEP,
    FILTER_TRANSFORMS,
    LIPSTICK_SHADES,
    RECOLOR_RATIO,
    Filter,
    adjust_brightness,
    apply_filter,
    auto_contrast,
    dilate_mask,
    naive_inpaint,
    overlap_area,
    recolor_region,
    retain_object,
)
from .types import BinaryMask, RasterImage

__all__ = [
    "RasterImage",
    "BinaryMask",
    "Filter",
    "FILTER_TRANSFORMS",
    "LIPSTICK_SHADES",
    "BRIGHTNESS_STEP",
    "RECOLOR_RATIO",
    "PSNR_CAP",
    "apply_filter",
    "adjust_brightness",
    "recolor_region",
    "retain_object",
    "naive_inpaint",
    "dilate_mask",
    "overlap_area",
    "auto_contrast",
    "psnr",
    "ssim",
]
