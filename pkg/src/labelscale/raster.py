"""Raster types and pixel-level primitives.

Images are plain 2-D numpy arrays indexed ``[row, col]``.  Gray images are
``uint8``; interpolation intermediates are ``float64`` and are never clamped
until :func:`labelscale.resample.quantize` is called.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

DEFAULT_LABELS = (0, 128, 255)


def as_gray(img) -> np.ndarray:
    """Validate ``img`` as an 8-bit grayscale raster and return it as uint8.

    Integer or float arrays are accepted as long as every sample is an
    integer in [0, 255]; anything else raises ``ValueError``.
    """
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype == bool:
        raise ValueError("boolean arrays are not gray images")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite samples")
    if np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.round(arr)):
        raise ValueError("samples must be integers in [0, 255]")
    return arr.astype(np.uint8)


def as_float(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite samples")
    return arr


def check_labels(labels) -> tuple[int, ...]:
    labels = tuple(int(v) for v in labels)
    if len(labels) < 2:
        raise ValueError("a label set needs at least two labels")
    if any(v < 0 or v > 255 for v in labels):
        raise ValueError(f"labels must lie in [0, 255]: {labels}")
    if any(b <= a for a, b in zip(labels, labels[1:])):
        raise ValueError(f"labels must be strictly ascending: {labels}")
    return labels


@dataclass(frozen=True)
class LabelMask:
    """A gray image whose samples are class labels.

    Canonicality is checked on demand; constructing a mask with stray
    values is allowed so that interpolated masks can be audited.
    """

    image: np.ndarray
    labels: tuple[int, ...] = field(default=DEFAULT_LABELS)

    def __post_init__(self):
        object.__setattr__(self, "image", as_gray(self.image))
        object.__setattr__(self, "labels", check_labels(self.labels))

    @property
    def shape(self) -> tuple[int, int]:
        return self.image.shape

    def is_canonical(self) -> bool:
        return set(class_histogram(self.image)) <= set(self.labels)


def class_histogram(mask) -> dict[int, int]:
    """Map each distinct sample value to its pixel count (no empty bins)."""
    counts = np.bincount(as_gray(mask).ravel(), minlength=256)
    return {int(v): int(counts[v]) for v in np.flatnonzero(counts)}


def median3x3(img) -> np.ndarray:
    """3x3 median filter with edge replication at the borders."""
    img = as_gray(img)
    padded = np.pad(img, 1, mode="edge")
    windows = sliding_window_view(padded, (3, 3)).reshape(*img.shape, 9)
    # 5th order statistic of 9 values
    return np.partition(windows, 4, axis=-1)[..., 4]


def subtract(a, b) -> np.ndarray:
    """Pixelwise ``max(a - b, 0)``."""
    a, b = as_gray(a), as_gray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.where(a > b, a - b, 0).astype(np.uint8)


def extract_class(mask, label: int) -> np.ndarray:
    """Keep pixels equal to ``label``; everything else becomes 0."""
    mask = as_gray(mask)
    if not 0 <= label <= 255:
        raise ValueError(f"label out of range: {label}")
    return np.where(mask == label, mask, 0).astype(np.uint8)
