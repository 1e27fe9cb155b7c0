"""Segmentation evaluation: per-class accuracy, IoU, boundary F1 and Dice."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage as ndi

from .raster import DEFAULT_LABELS, LabelMask, as_gray, check_labels

BF_DIAGONAL_FRACTION = 0.0075


def _pixels(mask) -> np.ndarray:
    return mask.image if isinstance(mask, LabelMask) else as_gray(mask)


def _check_pair(gt, pred) -> tuple[np.ndarray, np.ndarray]:
    gt, pred = _pixels(gt), _pixels(pred)
    if gt.shape != pred.shape:
        raise ValueError(f"shape mismatch: {gt.shape} vs {pred.shape}")
    return gt, pred


def region_name(label: int, labels) -> str:
    """``Region1`` is the highest label, ``Region2`` the next one, and so on."""
    order = sorted(labels, reverse=True)
    return f"Region{order.index(label) + 1}"


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[i, j]`` = pixels with ground truth ``labels[i]`` predicted as ``labels[j]``."""

    labels: tuple[int, ...]
    counts: np.ndarray

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValueError("cannot merge confusion matrices over different labels")
        return ConfusionMatrix(self.labels, self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tp(self) -> np.ndarray:
        return np.diag(self.counts)

    def fp(self) -> np.ndarray:
        return self.counts.sum(axis=0) - self.tp()

    def fn(self) -> np.ndarray:
        return self.counts.sum(axis=1) - self.tp()


def confusion(gt, pred, labels=DEFAULT_LABELS) -> ConfusionMatrix:
    labels = check_labels(labels)
    gt, pred = _check_pair(gt, pred)
    lut = np.full(256, -1, dtype=np.int64)
    lut[list(labels)] = np.arange(len(labels))
    gi, pi = lut[gt.ravel()], lut[pred.ravel()]
    if (gi < 0).any() or (pi < 0).any():
        seen = set(np.unique(gt).tolist()) | set(np.unique(pred).tolist())
        stray = sorted(seen - set(labels))
        raise ValueError(f"masks contain labels outside {labels}: {stray}")
    k = len(labels)
    counts = np.bincount(gi * k + pi, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(labels, counts)


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class accuracy (recall) and IoU; NaN marks an undefined class."""

    labels: tuple[int, ...]
    accuracy: np.ndarray
    iou: np.ndarray
    global_accuracy: float

    def mean_accuracy(self) -> float:
        return float(np.nanmean(self.accuracy)) if np.isfinite(self.accuracy).any() else math.nan

    def mean_iou(self) -> float:
        return float(np.nanmean(self.iou)) if np.isfinite(self.iou).any() else math.nan


def _ratio(num, den) -> np.ndarray:
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.full(num.shape, math.nan)
    np.divide(num, den, out=out, where=den > 0)
    return out


def class_metrics(cm: ConfusionMatrix) -> ClassMetrics:
    """Accuracy ``TP/(TP+FN)``, IoU ``TP/(TP+FP+FN)`` and global ``trace/total``.

    A class missing from the ground truth has undefined accuracy; a class
    missing from both masks has undefined IoU as well.
    """
    tp, fp, fn = cm.tp(), cm.fp(), cm.fn()
    acc = _ratio(tp, tp + fn)
    iou = _ratio(tp, tp + fp + fn)
    glob = float(tp.sum() / cm.total) if cm.total else math.nan
    return ClassMetrics(cm.labels, acc, iou, glob)


def boundary(region: np.ndarray) -> np.ndarray:
    """Pixels of ``region`` with a 4-neighbor outside it (the frame counts as outside)."""
    padded = np.pad(region, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return region & ~interior


def default_theta(shape) -> float:
    """BF distance tolerance: 0.75% of the image diagonal, at least one pixel."""
    h, w = shape
    return max(1.0, BF_DIAGONAL_FRACTION * math.hypot(h, w))


def _matched_fraction(src: np.ndarray, dst: np.ndarray, theta: float) -> float:
    # fraction of src boundary pixels within theta of some dst boundary pixel
    dist = ndi.distance_transform_edt(~dst)
    return float((dist[src] <= theta).mean())


def bf_score(gt, pred, label: int, theta: float | None = None) -> float:
    """Boundary F1 score of one class."""
    gt, pred = _check_pair(gt, pred)
    if theta is None:
        theta = default_theta(gt.shape)
    if theta <= 0:
        raise ValueError("theta must be positive")
    gb, pb = boundary(gt == label), boundary(pred == label)
    if not gb.any() and not pb.any():
        return 1.0
    if not gb.any() or not pb.any():
        return 0.0
    precision = _matched_fraction(pb, gb, theta)
    recall = _matched_fraction(gb, pb, theta)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def dice(gt, pred, labels=DEFAULT_LABELS) -> tuple[dict[int, float], float]:
    """Per-class Sørensen-Dice and their unweighted mean over present classes.

    Computed from the pixel sets directly, independently of :func:`confusion`.
    """
    labels = check_labels(labels)
    gt, pred = _check_pair(gt, pred)
    per_class = {}
    for label in labels:
        a, b = gt == label, pred == label
        size = int(a.sum() + b.sum())
        if size == 0:
            continue
        per_class[label] = 2 * int((a & b).sum()) / size
    mean = float(np.mean(list(per_class.values()))) if per_class else math.nan
    return per_class, mean


@dataclass
class ClassReport:
    label: int
    region: str
    accuracy: float
    iou: float
    mean_bf: float


@dataclass
class SegEvalReport:
    labels: tuple[int, ...]
    per_class: list[ClassReport]
    global_accuracy: float
    per_image_dice: list[float]
    confusion: ConfusionMatrix
    theta: float | None = None
    names: list[str] = field(default_factory=list)

    def by_label(self, label: int) -> ClassReport:
        for row in self.per_class:
            if row.label == label:
                return row
        raise KeyError(label)

    def ordered(self) -> list[ClassReport]:
        """Rows ordered Region1, Region2, ... (descending label)."""
        return sorted(self.per_class, key=lambda r: -r.label)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "regions": [
                {
                    "region": r.region,
                    "label": r.label,
                    "accuracy": _finite_or_none(r.accuracy),
                    "iou": _finite_or_none(r.iou),
                    "mean_bf": _finite_or_none(r.mean_bf),
                }
                for r in self.ordered()
            ],
            "global_accuracy": _finite_or_none(self.global_accuracy),
            "per_image_dice": [
                {"name": n, "dice": _finite_or_none(d)}
                for n, d in zip(self.names or [str(i) for i in range(len(self.per_image_dice))],
                                self.per_image_dice)
            ],
            "theta": self.theta,
            "confusion": self.confusion.counts.tolist(),
        }

    def csv_rows(self) -> list[list]:
        """Header plus one row per region, ordered Region1, Region2, ..."""
        rows = [["region", "label", "accuracy", "iou", "mean_bf"]]
        for r in self.ordered():
            rows.append([r.region, r.label, r.accuracy, r.iou, r.mean_bf])
        return rows


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def evaluate_corpus(pairs, labels=DEFAULT_LABELS, theta=None, names=None) -> SegEvalReport:
    """Evaluate a list of ``(gt, pred)`` mask pairs.

    Accuracy, IoU and global accuracy come from the confusion matrix summed
    over all pairs.  Mean BF is the per-image BF averaged over images (images
    where the class is absent from both masks count as 1.0).  ``theta=None``
    picks :func:`default_theta` per image.
    """
    labels = check_labels(labels)
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty corpus")
    total = None
    bf = {label: [] for label in labels}
    dices = []
    for gt, pred in pairs:
        cm = confusion(gt, pred, labels)
        total = cm if total is None else total + cm
        for label in labels:
            bf[label].append(bf_score(gt, pred, label, theta))
        dices.append(dice(gt, pred, labels)[1])
    m = class_metrics(total)
    per_class = [
        ClassReport(
            label,
            region_name(label, labels),
            float(m.accuracy[i]),
            float(m.iou[i]),
            float(np.mean(bf[label])),
        )
        for i, label in enumerate(labels)
    ]
    return SegEvalReport(
        labels, per_class, m.global_accuracy, dices, total, theta, list(names or [])
    )
