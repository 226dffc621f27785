"""Image quality metrics: PSNR, SSIM, masked L1."""
from __future__ import annotations

import numpy as np

from .types import BinaryMask, GrayImage, InvalidArgumentError, RgbImage

PSNR_CAP_DB = 99.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_L = 255.0


def _check_same_dims(a, b) -> None:
    if (a.height, a.width) != (b.height, b.width):
        raise InvalidArgumentError(
            f"image dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def psnr(a: RgbImage, b: RgbImage, mask: BinaryMask | None = None) -> float:
    """Peak signal-to-noise ratio in dB, capped at 99 for identical inputs."""
    _check_same_dims(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    if mask is not None:
        _check_same_dims(a, mask)
        if not mask.bits.any():
            raise InvalidArgumentError("empty mask")
        diff = diff[mask.bits]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(255.0 * 255.0 / mse))


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(a: GrayImage, b: GrayImage) -> float:
    """Structural similarity with the standard 11x11 Gaussian window.

    sigma=1.5, K1=0.01, K2=0.03, L=255; the score is the mean over all
    fully-interior windows.
    """
    _check_same_dims(a, b)
    if min(a.height, a.width) < SSIM_WINDOW:
        raise InvalidArgumentError(
            f"image must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, got {a.width}x{a.height}"
        )
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    x = a.data.astype(np.float64)
    y = b.data.astype(np.float64)

    def filt(img: np.ndarray) -> np.ndarray:
        windows = np.lib.stride_tricks.sliding_window_view(img, (SSIM_WINDOW, SSIM_WINDOW))
        return np.einsum("ijkl,kl->ij", windows, kernel)

    mu_x = filt(x)
    mu_y = filt(y)
    sxx = filt(x * x) - mu_x * mu_x
    syy = filt(y * y) - mu_y * mu_y
    sxy = filt(x * y) - mu_x * mu_y

    c1 = (SSIM_K1 * SSIM_L) ** 2
    c2 = (SSIM_K2 * SSIM_L) ** 2
    score = ((2 * mu_x * mu_y + c1) * (2 * sxy + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    )
    return float(score.mean())


def l1_masked(a: RgbImage, b: RgbImage, mask: BinaryMask) -> float:
    """Mean absolute difference over masked pixels and channels, in [0, 1]."""
    _check_same_dims(a, b)
    _check_same_dims(a, mask)
    if not mask.bits.any():
        raise InvalidArgumentError("empty mask")
    diff = np.abs(
        a.data[mask.bits].astype(np.float64) - b.data[mask.bits].astype(np.float64)
    )
    return float(diff.mean() / 255.0)
