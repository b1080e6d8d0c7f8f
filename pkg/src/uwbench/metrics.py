"""Full-reference and non-reference image quality metrics.

Full-reference: MSE, PSNR, SSIM, computed on the 8-bit scale (pixel values
in [0, 255]) so scores line up with the conventional benchmark tables.
Non-reference: UCIQE and UIQM with the published coefficient sets; the
component weights are exposed as module constants for sensitivity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import rgb_to_lab, validate_image

__all__ = [
    "MetricScores",
    "mse",
    "psnr",
    "ssim",
    "uciqe",
    "uiqm",
    "score_pair",
]

PEAK = 255.0

# SSIM defaults from the original formulation.
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
_LUMA = np.array([0.299, 0.587, 0.114])

# UCIQE: c1 * std(chroma) + c2 * contrast(L) + c3 * mean(saturation).
UCIQE_COEFFS = (0.4680, 0.2745, 0.2576)
# Largest chroma any sRGB color reaches under this package's Lab transform
# (attained at the blue primary); normalizes the chroma spread to ~[0, 1].
MAX_SRGB_CHROMA = 133.806055

# UIQM: c1 * UICM + c2 * UISM + c3 * UIConM, with 0.1 alpha-trimming for the
# colorfulness statistics and 8x8-pixel blocks for the EME/logAMEE sums.
UIQM_COEFFS = (0.0282, 0.2953, 3.5753)
UICM_ALPHA = 0.1
BLOCK = 8


@dataclass(frozen=True)
class MetricScores:
    """One image's scores; full-reference fields are None without a reference."""

    mse: float | None
    psnr: float | None
    ssim: float | None
    uciqe: float
    uiqm: float


def _check_same_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared error over all pixels and channels, 0-255 scale."""
    a = validate_image(a)
    b = validate_image(b)
    _check_same_dims(a, b)
    diff = (a - b) * PEAK
    return float(np.mean(diff * diff))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; identical images give inf."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def _local_mean(x: np.ndarray, window: np.ndarray) -> np.ndarray:
    # Separable Gaussian, then crop to fully interior (valid) windows.
    r = len(window) // 2
    out = ndimage.correlate1d(x, window, axis=0, mode="constant")
    out = ndimage.correlate1d(out, window, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity on the luminance channel.

    Uses the standard 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
    dynamic range 255, and only windows fully inside the image, so both
    dimensions must be at least 11.
    """
    a = validate_image(a)
    b = validate_image(b)
    _check_same_dims(a, b)
    h, w = a.shape[:2]
    if min(h, w) < SSIM_WINDOW:
        raise ValueError(f"image smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")

    x = (a @ _LUMA) * PEAK
    y = (b @ _LUMA) * PEAK

    t = np.arange(SSIM_WINDOW) - SSIM_WINDOW // 2
    g = np.exp(-(t * t) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
    g /= g.sum()

    mu_x = _local_mean(x, g)
    mu_y = _local_mean(y, g)
    var_x = _local_mean(x * x, g) - mu_x * mu_x
    var_y = _local_mean(y * y, g) - mu_y * mu_y
    cov = _local_mean(x * y, g) - mu_x * mu_y

    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def uciqe(img: np.ndarray) -> float:
    """Weighted sum of chroma spread, luminance contrast, and saturation.

    Computed in Lab: the standard deviation of chroma (normalized by the
    largest chroma the sRGB gamut reaches), the spread between the mean of
    the top and bottom 1% of L (scaled by 1/100), and the mean of
    chroma / sqrt(chroma^2 + L^2).
    """
    img = validate_image(img)
    lab = rgb_to_lab(img)
    lum = lab[..., 0].ravel()
    chroma = np.hypot(lab[..., 1], lab[..., 2]).ravel()

    sigma_c = float(chroma.std()) / MAX_SRGB_CHROMA

    n = lum.size
    k = max(1, -(-n // 100))  # integer ceil of n/100 (top/bottom 1%)
    ordered = np.sort(lum)
    con_l = float(ordered[n - k :].mean() - ordered[:k].mean()) / 100.0

    denom = np.sqrt(chroma * chroma + lum * lum)
    sat = np.divide(chroma, denom, out=np.zeros_like(chroma), where=denom > 0)
    mu_s = float(sat.mean())

    c1, c2, c3 = UCIQE_COEFFS
    return c1 * sigma_c + c2 * con_l + c3 * mu_s


def _trimmed_mean(values: np.ndarray, alpha: float) -> float:
    ordered = np.sort(values.ravel())
    t = int(alpha * ordered.size)
    kept = ordered[t : ordered.size - t]
    return float(kept.mean())


def _blocks(x: np.ndarray) -> np.ndarray:
    # Complete 8x8 blocks; trailing partial rows/columns are dropped.
    h, w = x.shape
    bh, bw = h // BLOCK, w // BLOCK
    if bh == 0 or bw == 0:
        return np.empty((0, BLOCK, BLOCK))
    v = x[: bh * BLOCK, : bw * BLOCK].reshape(bh, BLOCK, bw, BLOCK)
    return v.transpose(0, 2, 1, 3).reshape(bh * bw, BLOCK, BLOCK)


def _eme(x: np.ndarray) -> float:
    """Enhancement measure: block-wise log max/min ratio, 2/(k1 k2) scaled."""
    blocks = _blocks(x)
    if blocks.shape[0] == 0:
        return 0.0
    mx = blocks.max(axis=(1, 2))
    mn = blocks.min(axis=(1, 2))
    ok = mn > 0
    total = float(np.log(mx[ok] / mn[ok]).sum())
    return 2.0 / blocks.shape[0] * total


def _log_amee(x: np.ndarray) -> float:
    """Entropy-style block contrast: -(1/(k1 k2)) * sum kappa ln kappa."""
    blocks = _blocks(x)
    if blocks.shape[0] == 0:
        return 0.0
    mx = blocks.max(axis=(1, 2))
    mn = blocks.min(axis=(1, 2))
    top = mx - mn
    bot = mx + mn
    ok = (top > 0) & (bot > 0)
    kappa = top[ok] / bot[ok]
    return -float((kappa * np.log(kappa)).sum()) / blocks.shape[0]


def uicm(img: np.ndarray) -> float:
    """Colorfulness from alpha-trimmed statistics of the opponent channels."""
    x = validate_image(img) * PEAK
    rg = x[..., 0] - x[..., 1]
    yb = (x[..., 0] + x[..., 1]) / 2.0 - x[..., 2]
    mu_rg = _trimmed_mean(rg, UICM_ALPHA)
    mu_yb = _trimmed_mean(yb, UICM_ALPHA)
    var_rg = float(np.mean((rg - mu_rg) ** 2))
    var_yb = float(np.mean((yb - mu_yb) ** 2))
    return -0.0268 * math.hypot(mu_rg, mu_yb) + 0.1586 * math.sqrt(var_rg + var_yb)


def uism(img: np.ndarray) -> float:
    """Sharpness: EME of the Sobel-edge-weighted channels, luma weighted."""
    x = validate_image(img) * PEAK
    total = 0.0
    for c, weight in enumerate(_LUMA):
        chan = x[..., c]
        gx = ndimage.sobel(chan, axis=1)
        gy = ndimage.sobel(chan, axis=0)
        edge = np.hypot(gx, gy) * chan
        total += weight * _eme(edge)
    return float(total)


def uiconm(img: np.ndarray) -> float:
    """Contrast: block log-AMEE of the intensity channel."""
    x = validate_image(img) * PEAK
    return _log_amee(x.mean(axis=2))


def uiqm(img: np.ndarray) -> float:
    """Weighted sum of colorfulness, sharpness, and contrast measures."""
    c1, c2, c3 = UIQM_COEFFS
    return c1 * uicm(img) + c2 * uism(img) + c3 * uiconm(img)


def score_pair(result: np.ndarray, reference: np.ndarray | None = None) -> MetricScores:
    """Score one enhanced image, with full-reference metrics when possible."""
    result = validate_image(result)
    if reference is not None:
        reference = validate_image(reference)
        _check_same_dims(result, reference)
        return MetricScores(
            mse=mse(result, reference),
            psnr=psnr(result, reference),
            ssim=ssim(result, reference),
            uciqe=uciqe(result),
            uiqm=uiqm(result),
        )
    return MetricScores(mse=None, psnr=None, ssim=None, uciqe=uciqe(result), uiqm=uiqm(result))
