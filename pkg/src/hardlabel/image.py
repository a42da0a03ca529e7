"""Dense image tensors and the elementwise arithmetic the attacks are built on.

Pixels stay real-valued during search; quantization to bytes happens only at
file export. The dynamic range L travels with the tensor so the same code
serves both the [0, 1] and [0, 255] conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NTooLargeError, ShapeMismatchError


@dataclass(frozen=True, eq=False)
class ImageTensor:
    """An (H, W, C) float image with dynamic range [0, range].

    Immutable after construction; the pixel buffer is marked read-only so
    instances can be shared freely. Arithmetic helpers below return new
    tensors. Delta/direction tensors reuse this type and may legally hold
    values outside [0, range]; only clipping operations enforce the range.
    """

    pixels: np.ndarray
    range: float = 1.0

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ValueError(f"pixels must be (H, W, C) with all dims >= 1, got {arr.shape}")
        if not self.range > 0:
            raise ValueError(f"dynamic range must be positive, got {self.range}")
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)
        object.__setattr__(self, "range", float(self.range))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.pixels.shape

    @property
    def flat(self) -> np.ndarray:
        """Read-only flat view, row-major with channels innermost."""
        return self.pixels.reshape(-1)

    @classmethod
    def from_flat(cls, flat, shape: tuple[int, int, int], range: float = 1.0) -> "ImageTensor":
        arr = np.asarray(flat, dtype=np.float64).reshape(shape)
        return cls(arr, range)


def _check_combinable(a: ImageTensor, b: ImageTensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    if a.range != b.range:
        raise ShapeMismatchError(f"dynamic ranges differ: {a.range} vs {b.range}")


def midpoint(a: ImageTensor, b: ImageTensor) -> ImageTensor:
    """Elementwise average of two images; stays inside [0, L] automatically."""
    _check_combinable(a, b)
    return ImageTensor(0.5 * (a.pixels + b.pixels), a.range)


def l2_sq_dist(a: ImageTensor, b: ImageTensor) -> float:
    """Pixel-wise sum of squared differences."""
    _check_combinable(a, b)
    diff = a.pixels - b.pixels
    return float(np.sum(diff * diff))


def linf_dist(a: ImageTensor, b: ImageTensor) -> float:
    """Largest absolute per-pixel difference.

    Absolute values on purpose: a signed max can go negative and would end a
    bisection too early.
    """
    _check_combinable(a, b)
    return float(np.max(np.abs(a.pixels - b.pixels)))


def add_scaled_clipped(base: ImageTensor, delta: ImageTensor, scale: float) -> ImageTensor:
    """base + scale * delta, clipped into [0, L]."""
    _check_combinable(base, delta)
    return ImageTensor(np.clip(base.pixels + scale * delta.pixels, 0.0, base.range), base.range)


def sparse_mask(
    shape: tuple[int, int, int],
    n: int,
    rng: np.random.Generator,
    range: float = 1.0,
) -> ImageTensor:
    """Mask with exactly n distinct pixels set to L, everything else 0.

    Positions are drawn without replacement from rng; the same seed gives a
    bit-identical mask.
    """
    total = int(np.prod(shape))
    if not 1 <= n <= total:
        raise NTooLargeError(f"n={n} outside [1, {total}] for shape {shape}")
    # permutation()[:n] instead of choice(replace=False): its stream is stable
    # across numpy versions, which the golden-trace tests rely on.
    idx = rng.permutation(total)[:n]
    flat = np.zeros(total, dtype=np.float64)
    flat[idx] = range
    return ImageTensor.from_flat(flat, shape, range)


def make_rng(seed: int) -> np.random.Generator:
    """Seeded deterministic generator; each attack run owns exactly one."""
    return np.random.default_rng(int(seed))
