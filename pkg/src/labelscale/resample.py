"""Nearest-neighbor, bicubic and Lanczos-3 resampling.

All kernels share one geometry: destination pixel ``i`` samples the source
at ``(i + 0.5) * scale - 0.5`` with ``scale = src / dst`` (pixel centers
aligned).  Out-of-range taps are clamped to the border.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .raster import as_float, as_gray

CUBIC_A = -0.5


class Kernel(enum.Enum):
    NEAREST = "nearest"
    BICUBIC = "bicubic"
    LANCZOS3 = "lanczos3"

    @property
    def support(self) -> int:
        """Number of taps per axis (0 for nearest neighbor)."""
        return {Kernel.NEAREST: 0, Kernel.BICUBIC: 4, Kernel.LANCZOS3: 6}[self]


@dataclass(frozen=True)
class ResizeSpec:
    src_width: int
    src_height: int
    dst_width: int
    dst_height: int
    kernel: Kernel = Kernel.NEAREST

    def __post_init__(self):
        for name in ("src_width", "src_height", "dst_width", "dst_height"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        object.__setattr__(self, "kernel", Kernel(self.kernel))

    @classmethod
    def for_image(cls, img, size, kernel=Kernel.NEAREST) -> "ResizeSpec":
        """Build a spec taking ``img`` (rows x cols) to ``size = (width, height)``."""
        h, w = np.shape(img)
        return cls(w, h, int(size[0]), int(size[1]), Kernel(kernel))

    @property
    def scale_x(self) -> float:
        return self.src_width / self.dst_width

    @property
    def scale_y(self) -> float:
        return self.src_height / self.dst_height

    def check_source(self, img) -> None:
        h, w = np.shape(img)
        if (w, h) != (self.src_width, self.src_height):
            raise ValueError(
                f"image is {w}x{h} but spec expects {self.src_width}x{self.src_height}"
            )


def map_coord(dst_index, scale):
    """Source coordinate sampled by destination index ``dst_index``."""
    return (np.asarray(dst_index, dtype=np.float64) + 0.5) * scale - 0.5


def nearest_indices(src: int, dst: int) -> np.ndarray:
    # floor(map_coord + 0.5) == floor((2i + 1) * src / (2 * dst)), done in integers
    i = np.arange(dst, dtype=np.int64)
    return np.clip(((2 * i + 1) * src) // (2 * dst), 0, src - 1)


def resize_nearest(img, spec: ResizeSpec) -> np.ndarray:
    """Copy, for each destination pixel, the nearest source pixel (round half up)."""
    img = as_gray(img)
    spec.check_source(img)
    if spec.kernel is not Kernel.NEAREST:
        raise ValueError(f"resize_nearest needs a NEAREST spec, got {spec.kernel}")
    rows = nearest_indices(spec.src_height, spec.dst_height)
    cols = nearest_indices(spec.src_width, spec.dst_width)
    return img[np.ix_(rows, cols)]


def cubic_weight(t):
    """Keys cubic convolution kernel with a = -0.5."""
    a = CUBIC_A
    t = np.abs(np.asarray(t, dtype=np.float64))
    inner = (a + 2) * t**3 - (a + 3) * t**2 + 1
    outer = a * t**3 - 5 * a * t**2 + 8 * a * t - 4 * a
    out = np.where(t <= 1, inner, np.where(t < 2, outer, 0.0))
    return float(out) if out.ndim == 0 else out


def lanczos3_weight(t):
    """Lanczos window with three lobes: ``sinc(t) * sinc(t / 3)`` for |t| < 3."""
    t = np.asarray(t, dtype=np.float64)
    out = np.where(np.abs(t) < 3, np.sinc(t) * np.sinc(t / 3), 0.0)
    # sin(pi*k) is not exactly 0 in floating point
    out = np.where((t != 0) & (t == np.round(t)), 0.0, out)
    return float(out) if out.ndim == 0 else out


_WEIGHT_FN = {Kernel.BICUBIC: cubic_weight, Kernel.LANCZOS3: lanczos3_weight}


def tap_weights(src: int, dst: int, kernel: Kernel) -> np.ndarray:
    """Dense ``(dst, src)`` resampling matrix for one axis.

    Each row holds the kernel weights of the ``kernel.support`` nearest source
    samples, with out-of-range taps folded onto the border sample, and is
    renormalized to sum to one.
    """
    kernel = Kernel(kernel)
    if kernel is Kernel.NEAREST:
        mat = np.zeros((dst, src))
        mat[np.arange(dst), nearest_indices(src, dst)] = 1.0
        return mat
    n = kernel.support
    x = map_coord(np.arange(dst), src / dst)
    first = np.floor(x).astype(np.int64) - (n // 2 - 1)
    taps = first[:, None] + np.arange(n)[None, :]
    w = _WEIGHT_FN[kernel](x[:, None] - taps)
    w = w / w.sum(axis=1, keepdims=True)
    mat = np.zeros((dst, src))
    rows = np.repeat(np.arange(dst), n)
    np.add.at(mat, (rows, np.clip(taps, 0, src - 1).ravel()), w.ravel())
    return mat


def resize_kernel(img, spec: ResizeSpec) -> np.ndarray:
    """Separable bicubic or Lanczos-3 resize; the float result is not clamped."""
    if spec.kernel is Kernel.NEAREST:
        raise ValueError("resize_kernel needs BICUBIC or LANCZOS3")
    img = as_float(img)
    spec.check_source(img)
    wy = tap_weights(spec.src_height, spec.dst_height, spec.kernel)
    wx = tap_weights(spec.src_width, spec.dst_width, spec.kernel)
    return wy @ img @ wx.T


def quantize(f) -> np.ndarray:
    """Round half up, then clamp to [0, 255]."""
    f = as_float(f)
    return np.clip(np.floor(f + 0.5), 0, 255).astype(np.uint8)


def resize(img, size, kernel=Kernel.NEAREST) -> np.ndarray:
    """Resize a gray image to ``size = (width, height)`` and return uint8."""
    kernel = Kernel(kernel)
    spec = ResizeSpec.for_image(img, size, kernel)
    if kernel is Kernel.NEAREST:
        return resize_nearest(img, spec)
    return quantize(resize_kernel(img, spec))


def parse_size(text: str) -> tuple[int, int]:
    """Parse ``"WxH"`` into ``(width, height)``."""
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"size must look like 256x256, got {text!r}") from None
    if w < 1 or h < 1:
        raise ValueError(f"size must be positive, got {text!r}")
    return w, h


__all__ = [
    "Kernel",
    "ResizeSpec",
    "map_coord",
    "resize_nearest",
    "cubic_weight",
    "lanczos3_weight",
    "tap_weights",
    "resize_kernel",
    "quantize",
    "resize",
    "parse_size",
]
