"""PSNR and SSIM on 8-bit luma frames."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .frame_io import quantize
from .types import as_frame

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    frame_index: int
    method: str
    psnr: float
    ssim: float
    runtime: float


def _pair(reference, test, to_uint8: bool):
    reference, test = as_frame(reference), as_frame(test)
    if reference.shape != test.shape:
        raise ValueError(f"frame shapes differ: {reference.shape} vs {test.shape}")
    if to_uint8:
        reference = quantize(reference).astype(np.float64)
        test = quantize(test).astype(np.float64)
    return reference, test


def psnr(reference, test, to_uint8: bool = False) -> float:
    """Peak signal-to-noise ratio in dB for peak 255; ``inf`` for equal frames.

    With ``to_uint8`` both frames are rounded and clamped to 8 bits first.
    """
    reference, test = _pair(reference, test, to_uint8)
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK**2 / mse)


def _gaussian_window() -> np.ndarray:
    r = SSIM_WINDOW // 2
    g = np.exp(-0.5 * (np.arange(-r, r + 1) / SSIM_SIGMA) ** 2)
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    r = len(g) // 2
    out = correlate1d(correlate1d(img, g, axis=0, mode="constant"), g, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim_map(reference, test, to_uint8: bool = False) -> np.ndarray:
    """Local SSIM over every fully contained 11x11 Gaussian window."""
    x, y = _pair(reference, test, to_uint8)
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, got {x.shape}")
    g = _gaussian_window()
    mu_x = _filter_valid(x, g)
    mu_y = _filter_valid(y, g)
    var_x = _filter_valid(x * x, g) - mu_x**2
    var_y = _filter_valid(y * y, g) - mu_y**2
    cov = _filter_valid(x * y, g) - mu_x * mu_y
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    return ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / ((mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2))


def ssim(reference, test, to_uint8: bool = False) -> float:
    """Mean structural similarity (Gaussian window, sigma 1.5, K1=0.01,
    K2=0.03, dynamic range 255). Exactly 1.0 for identical frames."""
    x, y = _pair(reference, test, to_uint8)
    if np.array_equal(x, y):
        if min(x.shape) < SSIM_WINDOW:
            raise ValueError(f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, got {x.shape}")
        return 1.0
    return float(np.mean(ssim_map(x, y)))
