"""Image quality metrics and intensity profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ArgumentError

SSIM_SIGMA = 1.5
SSIM_RADIUS = 5  # 11 x 11 window
K1, K2 = 0.01, 0.03


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    ssim: float
    mse: float

    @property
    def mse_e3(self) -> float:
        """MSE in units of 1e-3, the convention of the results tables."""
        return self.mse * 1e3


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ArgumentError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(recon, reference) -> float:
    a, b = _pair(recon, reference)
    return float(np.mean((a - b) ** 2))


def psnr(recon, reference, data_range: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    if data_range <= 0:
        raise ArgumentError("data_range must be positive")
    err = mse(recon, reference)
    if err == 0:
        return math.inf
    return 10 * math.log10(data_range ** 2 / err)


def ssim(recon, reference, data_range: float = 1.0) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Local statistics are averaged only where the window fits inside the image.
    """
    a, b = _pair(recon, reference)
    if data_range <= 0:
        raise ArgumentError("data_range must be positive")
    if min(a.shape) < 2 * SSIM_RADIUS + 1:
        raise ArgumentError(f"images must be at least {2 * SSIM_RADIUS + 1} pixels per side")
    if np.array_equal(a, b):
        return 1.0
    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2
    blur = lambda z: gaussian_filter(z, SSIM_SIGMA, truncate=SSIM_RADIUS / SSIM_SIGMA)
    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a ** 2
    var_b = blur(b * b) - mu_b ** 2
    cov = blur(a * b) - mu_a * mu_b
    smap = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
    r = SSIM_RADIUS
    return float(smap[r:-r, r:-r].mean())


def evaluate(recon, reference, data_range: float = 1.0) -> MetricReport:
    return MetricReport(psnr=psnr(recon, reference, data_range),
                        ssim=ssim(recon, reference, data_range),
                        mse=mse(recon, reference))


def profile_line(img, axis: str, index: int) -> np.ndarray:
    """Intensities along row ``index`` (``axis='row'``) or column ``index`` (``axis='col'``)."""
    img = np.asarray(img)
    if axis not in ("row", "col"):
        raise ArgumentError(f"axis must be 'row' or 'col', got {axis!r}")
    n = img.shape[0] if axis == "row" else img.shape[1]
    if not 0 <= index < n:
        raise ArgumentError(f"{axis} index {index} out of range [0, {n})")
    return (img[index, :] if axis == "row" else img[:, index]).copy()
