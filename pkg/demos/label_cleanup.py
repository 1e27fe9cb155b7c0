"""
Cleaning an interpolated mask back to three labels
==================================================

"""

import numpy as np

from labelscale import FilterStrategy, Kernel, LabelMask, ResizeSpec, audit, mask_resize

# a two-class mask (no 128 anywhere) with a notch in one corner
mask = np.zeros((24, 24), np.uint8)
mask[4:20, 4:20] = 255
mask[4:10, 14:20] = 0
spec = ResizeSpec.for_image(mask, (48, 48), Kernel.BICUBIC)

# thresholding alone maps every value into {0, 128, 255},
# but the blend at corners lands in the middle band
for strategy in FilterStrategy:
    out = mask_resize(LabelMask(mask), spec, strategy).image
    rep = audit(out)
    print(f"{strategy.value:>9}: labels {sorted(rep.found)}, "
          f"128-pixels {int((out == 128).sum())}, canonical {rep.is_canonical}")

# a mask that really has a middle class keeps it
mask[8:16, 8:16] = 128
out = mask_resize(LabelMask(mask), spec, FilterStrategy.FIVE_STEP).image
print("with a real middle class:", int((mask == 128).sum()) * 4, "expected,",
      int((out == 128).sum()), "kept")
