"""Image quality metrics for the object-removal evaluation."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ShapeMismatch
from .types import RasterImage

# Identical images would give infinite PSNR; they report this cap instead.
PSNR_CAP = 99.0

SSIM_WINDOW = 8
SSIM_STRIDE = 4
_SSIM_C1 = (0.01 * 255.0) ** 2
_SSIM_C2 = (0.03 * 255.0) ** 2

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def _require_same_shape(a: RasterImage, b: RasterImage) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeMismatch(f"{a.data.shape} vs {b.data.shape}")


def psnr(a: RasterImage, b: RasterImage) -> float:
    """Peak signal-to-noise ratio in dB: 10*log10(255^2 / MSE), capped at
    99.0 for identical images."""
    _require_same_shape(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * math.log10(255.0**2 / mse), PSNR_CAP)


def _to_gray(image: RasterImage) -> np.ndarray:
    if image.channels == 1:
        return image.data[:, :, 0].astype(np.float64)
    return image.data.astype(np.float64) @ _LUMA_WEIGHTS


def _window_origins(size: int, window: int, stride: int) -> list[int]:
    if size <= window:
        return [0]
    last = size - window
    origins = list(range(0, last + 1, stride))
    if origins[-1] != last:
        origins.append(last)
    return origins


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean structural similarity over 8x8 windows with stride 4.

    RGB inputs are reduced to luma first. Windows shrink to the whole image
    when it is smaller than 8 pixels on a side. Identical inputs give
    exactly 1.0.
    """
    _require_same_shape(a, b)
    x = _to_gray(a)
    y = _to_gray(b)
    h, w = x.shape
    win_h = min(SSIM_WINDOW, h)
    win_w = min(SSIM_WINDOW, w)

    values = []
    for oy in _window_origins(h, win_h, SSIM_STRIDE):
        for ox in _window_origins(w, win_w, SSIM_STRIDE):
            wx = x[oy : oy + win_h, ox : ox + win_w]
            wy = y[oy : oy + win_h, ox : ox + win_w]
            mx = float(wx.mean())
            my = float(wy.mean())
            dx = wx - mx
            dy = wy - my
            vx = float((dx * dx).mean())
            vy = float((dy * dy).mean())
            cov = float((dx * dy).mean())
            num = (2.0 * mx * my + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
            den = (mx * mx + my * my + _SSIM_C1) * (vx + vy + _SSIM_C2)
            values.append(num / den)
    return float(np.mean(values))
