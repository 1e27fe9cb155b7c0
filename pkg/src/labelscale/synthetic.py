"""Synthetic masks, phantom image/mask pairs and quantification records.

Used by the test suite and the demo scripts in place of clinical data.
"""
from __future__ import annotations

import numpy as np

from .dataset import SamplePair, translate
from .quantcompare import QuantRecord
from .raster import LabelMask


def random_mask(rng, shape, labels=(128, 255), n_shapes=(1, 6), min_size=3, background=0):
    """Overlapping random rectangles and ellipses painted on ``background``.

    Every shape is at least ``min_size`` pixels across.
    """
    h, w = shape
    mask = np.full(shape, background, dtype=np.uint8)
    yy, xx = np.mgrid[:h, :w]
    for _ in range(rng.integers(n_shapes[0], n_shapes[1] + 1)):
        label = labels[rng.integers(len(labels))]
        sh = int(rng.integers(min_size, max(min_size + 1, h // 2)))
        sw = int(rng.integers(min_size, max(min_size + 1, w // 2)))
        top = int(rng.integers(0, h - sh + 1))
        left = int(rng.integers(0, w - sw + 1))
        if rng.random() < 0.5:
            mask[top:top + sh, left:left + sw] = label
        else:
            cy, cx = top + (sh - 1) / 2, left + (sw - 1) / 2
            inside = ((yy - cy) / (sh / 2)) ** 2 + ((xx - cx) / (sw / 2)) ** 2 < 1
            mask[inside] = label
    return mask


def has_boundary(mask) -> bool:
    return np.unique(mask).size > 1


def mask_corpus(rng, n, sizes=(16, 128), labels=(128, 255), boundary_only=False):
    """``n`` random square masks with side lengths drawn from ``sizes`` (inclusive)."""
    out = []
    while len(out) < n:
        side = int(rng.integers(sizes[0], sizes[1] + 1))
        m = random_mask(rng, (side, side), labels)
        if boundary_only and not has_boundary(m):
            continue
        out.append(m)
    return out


def phantom_mask(rng, size=128):
    """Ring-shaped 128 region around a 255 core on a 0 background."""
    h = w = size
    yy, xx = np.mgrid[:h, :w]
    cy, cx = rng.uniform(0.4, 0.6, 2) * size
    r_out = rng.uniform(0.18, 0.3) * size
    r_in = r_out * rng.uniform(0.55, 0.75)
    ecc = rng.uniform(0.8, 1.2)
    d = np.hypot((yy - cy) * ecc, (xx - cx) / ecc)
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[d < r_out] = 128
    mask[d < r_in] = 255
    # a scar-like 255 bite into the ring
    ang = np.arctan2(yy - cy, xx - cx)
    a0 = rng.uniform(-np.pi, np.pi)
    bite = (np.abs(np.angle(np.exp(1j * (ang - a0)))) < rng.uniform(0.2, 0.6)) & (d < (r_in + r_out) / 2)
    mask[bite] = 255
    return mask


def phantom_image(rng, mask, noise=12.0):
    """Gray image whose intensities follow the mask classes plus Gaussian noise."""
    base = np.select([mask == 255, mask == 128], [200.0, 90.0], 30.0)
    img = base + rng.normal(0, noise, mask.shape)
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def phantom_corpus(rng, n, size=128):
    pairs = []
    for i in range(n):
        mask = phantom_mask(rng, size)
        pairs.append(SamplePair(f"phantom_{i:03d}", phantom_image(rng, mask), LabelMask(mask)))
    return pairs


def perturb(rng, mask, shift=1, flip_fraction=0.01, labels=(0, 128, 255)):
    """Imitate an imperfect prediction: a small shift plus random label flips."""
    dx, dy = (int(v) for v in rng.integers(-shift, shift + 1, size=2))
    out = translate(mask, dx, dy, labels[0])
    flips = rng.random(mask.shape) < flip_fraction
    out[flips] = rng.choice(labels, size=int(flips.sum()))
    return out


def quant_records(rng, n_stacks=24, networks=("C128", "N256", "B256", "L256"), error=0.25):
    """Manual records plus noisy automated copies for each network."""
    recs = []
    manual = []
    for i in range(n_stacks):
        sid = f"stack{i:02d}"
        scar_ml = rng.uniform(2, 40)
        r = QuantRecord(sid, "manual", scar_ml, rng.uniform(2, 30), rng.uniform(0, 3))
        manual.append(r)
        recs.append(r)
    for net in networks:
        for m in manual:
            jitter = rng.uniform(1 - error, 1 + error, 3)
            recs.append(QuantRecord(
                m.stack_id, net,
                m.scar_ml * jitter[0],
                min(100.0, m.scar_pct * jitter[1]),
                min(100.0, m.mo_pct * jitter[2]),
            ))
    return recs
