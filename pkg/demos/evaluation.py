"""
Scoring predicted masks against ground truth
============================================

"""

import numpy as np

from labelscale import evaluate_corpus
from labelscale.synthetic import perturb, phantom_mask

rng = np.random.default_rng(3)
gt = [phantom_mask(rng, 96) for _ in range(10)]

# predictions shifted by up to two pixels, with 2% random label flips
pred = [perturb(rng, m, shift=2, flip_fraction=0.02) for m in gt]

report = evaluate_corpus(list(zip(gt, pred)))
print(f"{'region':<8} {'label':>5} {'acc':>7} {'iou':>7} {'bf':>7}")
for r in report.ordered():
    print(f"{r.region:<8} {r.label:>5} {r.accuracy:7.3f} {r.iou:7.3f} {r.mean_bf:7.3f}")
print(f"global accuracy {report.global_accuracy:.3f}")
print("per-image dice:", " ".join(f"{d:.3f}" for d in report.per_image_dice))
