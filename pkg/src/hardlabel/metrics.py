"""Imperceptibility metrics: squared-L2 perturbation norm, SSIM, Pearson CC."""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

from .errors import ImageTooSmallError, ZeroVarianceError
from .image import ImageTensor, l2_sq_dist, _check_combinable


def perturbation_norm(adv: ImageTensor, clean: ImageTensor) -> float:
    """Sum of squared pixel differences, in native pixel units squared."""
    return l2_sq_dist(adv, clean)


def _gaussian_window(win_size: int, sigma: float = 1.5) -> np.ndarray:
    radius = (win_size - 1) // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    g /= g.sum()
    return np.outer(g, g)


def ssim(a: ImageTensor, b: ImageTensor, win_size: int = 11) -> float:
    """Mean local structural similarity with a Gaussian window (sigma = 1.5).

    Stabilizers are C1 = (0.01 L)^2 and C2 = (0.03 L)^2 for dynamic range L.
    Local statistics are Gaussian-weighted population moments over the
    window, evaluated only where the window fits entirely inside the image;
    channels are scored independently and averaged. Result lies in [-1, 1],
    and equals 1 exactly when the images agree.

    win_size must be odd and >= 3; both spatial dims must be >= win_size.
    The 11x11 default is the conventional choice for images 11 px or larger;
    smaller inputs need an explicitly smaller window.
    """
    _check_combinable(a, b)
    if win_size < 3 or win_size % 2 == 0:
        raise ValueError(f"win_size must be odd and >= 3, got {win_size}")
    h, w, channels = a.shape
    if min(h, w) < win_size:
        raise ImageTooSmallError(
            f"image {h}x{w} smaller than the {win_size}x{win_size} SSIM window"
        )
    window = _gaussian_window(win_size)
    c1 = (0.01 * a.range) ** 2
    c2 = (0.03 * a.range) ** 2
    scores = []
    for ch in range(channels):
        x = a.pixels[:, :, ch]
        y = b.pixels[:, :, ch]
        ux = convolve2d(x, window, mode="valid")
        uy = convolve2d(y, window, mode="valid")
        uxx = convolve2d(x * x, window, mode="valid")
        uyy = convolve2d(y * y, window, mode="valid")
        uxy = convolve2d(x * y, window, mode="valid")
        vx = uxx - ux * ux
        vy = uyy - uy * uy
        cxy = uxy - ux * uy
        s = ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / (
            (ux * ux + uy * uy + c1) * (vx + vy + c2)
        )
        scores.append(float(np.mean(s)))
    return float(np.mean(scores))


def correlation(a: ImageTensor, b: ImageTensor) -> float:
    """Pearson correlation over flattened pixels; undefined on constant images."""
    _check_combinable(a, b)
    x = a.flat - a.flat.mean()
    y = b.flat - b.flat.mean()
    sx = float(np.sum(x * x))
    sy = float(np.sum(y * y))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVarianceError("correlation undefined: at least one image is constant")
    r = float(np.sum(x * y)) / np.sqrt(sx * sy)
    # rounding can push |r| infinitesimally past 1
    return float(np.clip(r, -1.0, 1.0))
