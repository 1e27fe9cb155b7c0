"""Removal of spurious class labels from interpolated tri-class masks.

Bicubic and Lanczos resampling synthesize intermediate intensities along
class boundaries.  A plain three-way threshold (:func:`eq1_threshold`) maps
most of them back onto ``{0, 128, 255}`` but leaves thin ribbons of 128
wherever a 0 region meets a 255 region.  :func:`remove_extra_labels` chains
thresholding, class subtraction and a 3x3 median to remove those ribbons
while keeping genuine 128 regions.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .raster import (
    DEFAULT_LABELS,
    LabelMask,
    as_gray,
    check_labels,
    class_histogram,
    extract_class,
    median3x3,
    subtract,
)
from .resample import Kernel, ResizeSpec, quantize, resize_kernel, resize_nearest

TRI_LABELS = (0, 128, 255)
MIDDLE = 128
MAX_MEDIAN_PASSES = 64


class UnsupportedConfiguration(ValueError):
    """A filter was requested for a label set it cannot handle."""


class FilterStrategy(enum.Enum):
    NONE = "none"
    EQ1_ONLY = "eq1"
    FIVE_STEP = "five-step"


@dataclass(frozen=True)
class ExtraLabel:
    label: int
    count: int
    example: tuple[int, int]  # (row, col)


@dataclass(frozen=True)
class AuditReport:
    expected_labels: tuple[int, ...]
    found: dict[int, int]
    extra: tuple[ExtraLabel, ...]

    @property
    def is_canonical(self) -> bool:
        return not self.extra

    def to_dict(self) -> dict:
        return {
            "expected_labels": list(self.expected_labels),
            "found": {str(k): v for k, v in self.found.items()},
            "extra": [
                {"label": e.label, "count": e.count, "example": list(e.example)}
                for e in self.extra
            ],
            "is_canonical": self.is_canonical,
        }


def _require_tri(labels) -> None:
    if tuple(labels) != TRI_LABELS:
        raise UnsupportedConfiguration(
            f"label cleanup is defined for labels {TRI_LABELS}, got {tuple(labels)}"
        )


def eq1_threshold(mask) -> np.ndarray:
    """Three-way threshold: ``x < 64 -> 0``, ``x > 192 -> 255``, else 128."""
    mask = as_gray(mask)
    out = np.full(mask.shape, MIDDLE, dtype=np.uint8)
    out[mask < 64] = 0
    out[mask > 192] = 255
    return out


def _median_to_root(img, passes):
    for _ in range(passes if passes is not None else MAX_MEDIAN_PASSES):
        nxt = median3x3(img)
        if np.array_equal(nxt, img):
            break
        img = nxt
    return img


def remove_extra_labels(interp, labels=TRI_LABELS, median_passes=None) -> np.ndarray:
    """Five-step cleanup of an unquantized BICUBIC/LANCZOS3 mask.

    Parameters
    ----------
    interp : ndarray of float
        Output of :func:`labelscale.resample.resize_kernel` on a canonical mask.
    labels : sequence of int
        Must be ``(0, 128, 255)``.
    median_passes : int or None
        How many times the 3x3 median is applied to the 128 layer.  ``None``
        repeats it until the layer stops changing, which also clears the
        compact 128 clusters left where 0 and 255 regions touch diagonally;
        a single pass only removes 1-pixel ribbons.

    Returns
    -------
    ndarray of uint8
        Mask whose values are all in ``{0, 128, 255}``.
    """
    _require_tri(check_labels(labels))
    if median_passes is not None and median_passes < 1:
        raise ValueError("median_passes must be >= 1 or None")
    s1 = quantize(interp)
    s2 = eq1_threshold(s1)
    middle = extract_class(s2, MIDDLE)
    s3 = subtract(s2, middle)
    s4 = _median_to_root(middle, median_passes)
    # 128 pixels rejected by the median fall back to the nearer outer class
    rejected = (middle == MIDDLE) & (s4 != MIDDLE)
    fallback = np.where(s1 < MIDDLE, 0, 255).astype(np.uint8)
    s5 = np.where(s4 == MIDDLE, MIDDLE, np.where(rejected, fallback, s3))
    return s5.astype(np.uint8)


def audit(mask, expected=DEFAULT_LABELS) -> AuditReport:
    """List every histogram bin of ``mask`` that is not an expected label."""
    mask = as_gray(mask)
    expected = tuple(int(v) for v in expected)
    if not expected:
        raise ValueError("expected label list is empty")
    found = class_histogram(mask)
    extra = []
    for label, count in found.items():
        if label in expected:
            continue
        r, c = np.argwhere(mask == label)[0]
        extra.append(ExtraLabel(label, count, (int(r), int(c))))
    return AuditReport(expected, found, tuple(extra))


def mask_resize(mask, spec: ResizeSpec, strategy=FilterStrategy.FIVE_STEP) -> LabelMask:
    """Resize a canonical label mask and optionally clean up spurious labels.

    Nearest-neighbor resizing never creates new labels, so ``strategy`` is
    ignored for ``Kernel.NEAREST``.
    """
    if not isinstance(mask, LabelMask):
        mask = LabelMask(mask)
    strategy = FilterStrategy(strategy)
    if not mask.is_canonical():
        bad = audit(mask.image, mask.labels).extra
        raise ValueError(f"mask is not canonical, stray labels {[e.label for e in bad]}")
    if spec.kernel is Kernel.NEAREST:
        return LabelMask(resize_nearest(mask.image, spec), mask.labels)
    if strategy is not FilterStrategy.NONE:
        _require_tri(mask.labels)
    interp = resize_kernel(mask.image, spec)
    if strategy is FilterStrategy.NONE:
        out = quantize(interp)
    elif strategy is FilterStrategy.EQ1_ONLY:
        out = eq1_threshold(quantize(interp))
    else:
        out = remove_extra_labels(interp, mask.labels)
    return LabelMask(out, mask.labels)
