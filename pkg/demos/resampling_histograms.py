"""
Resampling a label mask and counting gray levels
================================================

"""

import numpy as np

from labelscale import Kernel, resize
from labelscale.synthetic import phantom_mask

# a 64x64 tri-class mask: background 0, ring 128, core 255
rng = np.random.default_rng(0)
mask = phantom_mask(rng, 64)
print("source levels:", np.unique(mask).tolist())

# nearest neighbor only copies pixels, so the label set survives
# the interpolating kernels blend neighbors and invent new levels
for kernel in Kernel:
    up = resize(mask, (128, 128), kernel)
    levels = np.unique(up)
    print(f"{kernel.value:>9}: {levels.size:3d} distinct levels, "
          f"min {levels.min()}, max {levels.max()}")

# where do the new levels live?  only along class borders
up = resize(mask, (128, 128), Kernel.BICUBIC)
stray = ~np.isin(up, [0, 128, 255])
print(f"bicubic stray pixels: {stray.sum()} of {up.size}")
