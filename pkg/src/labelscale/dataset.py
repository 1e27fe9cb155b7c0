"""Corpus handling: image/mask pairing, splitting, augmentation and export."""
from __future__ import annotations

import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .maskfilter import FilterStrategy, audit, mask_resize
from .raster import DEFAULT_LABELS, LabelMask, as_gray
from .resample import Kernel, ResizeSpec, quantize, resize_kernel, resize_nearest

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".pgm")
_FORMATS = {".png": "PNG", ".pgm": "PPM"}


class UnpairedError(ValueError):
    def __init__(self, missing_masks, missing_images):
        self.missing_masks = list(missing_masks)
        self.missing_images = list(missing_images)
        parts = []
        if self.missing_masks:
            parts.append(f"images without mask: {', '.join(self.missing_masks)}")
        if self.missing_images:
            parts.append(f"masks without image: {', '.join(self.missing_images)}")
        super().__init__("; ".join(parts))


# -- file I/O ---------------------------------------------------------------

def read_image(path) -> np.ndarray:
    """Read an 8-bit grayscale PNG or binary PGM as a uint8 array."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                raise ValueError(f"{path}: expected 8-bit grayscale, got mode {im.mode}")
            return np.array(im, dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise ValueError(f"{path}: cannot decode image ({exc})") from exc


def write_image(path, img) -> None:
    """Write PNG or P5 PGM by suffix; the file appears atomically."""
    path = Path(path)
    fmt = _FORMATS.get(path.suffix.lower())
    if fmt is None:
        raise ValueError(f"{path}: unsupported suffix, use one of {IMAGE_SUFFIXES}")
    img = as_gray(img)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            Image.fromarray(img, mode="L").save(fh, format=fmt)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def list_images(directory) -> dict[str, Path]:
    """Map file stem to path for every PNG/PGM in ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    out = {}
    for p in sorted(directory.iterdir()):
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
            if p.stem in out:
                raise ValueError(f"duplicate stem {p.stem!r} in {directory}")
            out[p.stem] = p
    return out


# -- pairs ------------------------------------------------------------------

@dataclass(frozen=True)
class SamplePair:
    id: str
    image: np.ndarray
    mask: LabelMask

    def __post_init__(self):
        object.__setattr__(self, "image", as_gray(self.image))
        if not isinstance(self.mask, LabelMask):
            object.__setattr__(self, "mask", LabelMask(self.mask))
        if self.image.shape != self.mask.shape:
            raise ValueError(
                f"{self.id}: image {self.image.shape} and mask {self.mask.shape} differ"
            )


@dataclass
class ScanReport:
    pairs: list[SamplePair]
    unpaired_images: list[str] = field(default_factory=list)
    unpaired_masks: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def scan_pairs(image_dir, mask_dir, labels=DEFAULT_LABELS, allow_unpaired=False) -> ScanReport:
    """Pair images and masks by file stem, in lexicographic stem order.

    Raises :class:`UnpairedError` if any stem is present on one side only,
    unless ``allow_unpaired`` is set.  Non-canonical masks are kept but
    produce a warning.
    """
    images, masks = list_images(image_dir), list_images(mask_dir)
    lonely_images = sorted(set(images) - set(masks))
    lonely_masks = sorted(set(masks) - set(images))
    if (lonely_images or lonely_masks) and not allow_unpaired:
        raise UnpairedError(lonely_images, lonely_masks)
    report = ScanReport([], lonely_images, lonely_masks)
    for stem in sorted(set(images) & set(masks)):
        pair = SamplePair(stem, read_image(images[stem]), LabelMask(read_image(masks[stem]), labels))
        rep = audit(pair.mask.image, labels)
        if not rep.is_canonical:
            msg = f"{stem}: mask has extra labels {[e.label for e in rep.extra]}"
            log.warning(msg)
            report.warnings.append(msg)
        report.pairs.append(pair)
    return report


# -- split ------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if min(fracs) <= 0:
            raise ValueError("split fractions must be positive")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)}")

    def sizes(self, n: int) -> tuple[int, int, int]:
        """Train and validation sizes rounded half up; test takes the rest."""
        n_train = min(n, math.floor(self.train_frac * n + 0.5))
        n_val = min(n - n_train, math.floor(self.val_frac * n + 0.5))
        return n_train, n_val, n - n_train - n_val


def split(items, spec: SplitSpec = SplitSpec()):
    """Shuffle with ``spec.seed`` and cut into (train, val, test) lists."""
    items = list(items)
    if not items:
        raise ValueError("cannot split an empty list")
    order = np.random.default_rng(spec.seed).permutation(len(items))
    shuffled = [items[i] for i in order]
    n_train, n_val, _ = spec.sizes(len(items))
    return (
        shuffled[:n_train],
        shuffled[n_train:n_train + n_val],
        shuffled[n_train + n_val:],
    )


# -- augmentation -----------------------------------------------------------

@dataclass(frozen=True)
class AugmentSpec:
    reflect_lr_prob: float = 0.5
    translate_range: tuple[int, int] = (-10, 10)
    fill_value: int = 0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.translate_range
        if int(lo) != lo or int(hi) != hi or lo > hi:
            raise ValueError(f"bad translate range {self.translate_range}")
        if not 0 <= self.reflect_lr_prob <= 1:
            raise ValueError("reflect_lr_prob must be in [0, 1]")
        if not 0 <= self.fill_value <= 255:
            raise ValueError("fill_value must be in [0, 255]")


def reflect_lr(img: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(img[:, ::-1])


def translate(img: np.ndarray, dx: int, dy: int, fill: int) -> np.ndarray:
    """Shift content right by ``dx`` and down by ``dy``; ``out[y, x] = img[y - dy, x - dx]``."""
    h, w = img.shape
    out = np.full_like(img, fill)
    if abs(dx) >= w or abs(dy) >= h:
        return out
    out[max(dy, 0):h + min(dy, 0), max(dx, 0):w + min(dx, 0)] = \
        img[max(-dy, 0):h - max(dy, 0), max(-dx, 0):w - max(dx, 0)]
    return out


def augment(pair: SamplePair, spec: AugmentSpec, rng: np.random.Generator) -> SamplePair:
    """Random left-right reflection followed by a random integer translation.

    Image and mask get the same transform.  Vacated image pixels take
    ``spec.fill_value``; vacated mask pixels take the lowest label.
    """
    image, mask = pair.image, pair.mask.image
    if rng.random() < spec.reflect_lr_prob:
        image, mask = reflect_lr(image), reflect_lr(mask)
    lo, hi = spec.translate_range
    dx, dy = (int(v) for v in rng.integers(lo, hi + 1, size=2))
    image = translate(image, dx, dy, spec.fill_value)
    mask = translate(mask, dx, dy, pair.mask.labels[0])
    return SamplePair(pair.id, image, LabelMask(mask, pair.mask.labels))


# -- export -----------------------------------------------------------------

@dataclass
class ExportSummary:
    kernel: str
    strategy: str
    size: tuple[int, int]
    written: list[str] = field(default_factory=list)
    non_canonical: dict[str, list[int]] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def canonical_fraction(self) -> float:
        if not self.written:
            return math.nan
        return 1.0 - len(self.non_canonical) / len(self.written)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "strategy": self.strategy,
            "size": list(self.size),
            "written": self.written,
            "n_written": len(self.written),
            "n_non_canonical": len(self.non_canonical),
            "canonical_fraction": None if not self.written else self.canonical_fraction,
            "non_canonical": self.non_canonical,
            "failures": self.failures,
        }


def resize_image(img, size, kernel) -> np.ndarray:
    spec = ResizeSpec.for_image(img, size, kernel)
    if spec.kernel is Kernel.NEAREST:
        return resize_nearest(img, spec)
    return quantize(resize_kernel(img, spec))


def export_resized(pairs, size, kernel, strategy, image_out, mask_out, suffix=".png") -> ExportSummary:
    """Resize every pair to ``size = (width, height)`` and write both rasters.

    Masks go through :func:`labelscale.maskfilter.mask_resize`; each written
    mask is audited.  A failing pair is recorded and the export continues.
    """
    kernel, strategy = Kernel(kernel), FilterStrategy(strategy)
    summary = ExportSummary(kernel.value, strategy.value, tuple(size))
    for pair in pairs:
        try:
            spec = ResizeSpec.for_image(pair.image, size, kernel)
            image = resize_image(pair.image, size, kernel)
            mask = mask_resize(pair.mask, spec, strategy)
            write_image(Path(image_out) / f"{pair.id}{suffix}", image)
            write_image(Path(mask_out) / f"{pair.id}{suffix}", mask.image)
        except (OSError, ValueError) as exc:
            log.error("export failed for %s: %s", pair.id, exc)
            summary.failures[pair.id] = str(exc)
            continue
        summary.written.append(pair.id)
        rep = audit(mask.image, pair.mask.labels)
        if not rep.is_canonical:
            summary.non_canonical[pair.id] = [e.label for e in rep.extra]
    return summary
