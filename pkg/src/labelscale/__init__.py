"""Resampling of gray images and class-label masks, spurious-label cleanup,
and segmentation / quantification evaluation."""

__version__ = "0.1.0"

from .raster import (  # noqa: E402
    DEFAULT_LABELS,
    LabelMask,
    class_histogram,
    extract_class,
    median3x3,
    subtract,
)
from .resample import (  # noqa: E402
    Kernel,
    ResizeSpec,
    cubic_weight,
    lanczos3_weight,
    map_coord,
    quantize,
    resize,
    resize_kernel,
    resize_nearest,
)
from .maskfilter import (  # noqa: E402
    AuditReport,
    FilterStrategy,
    UnsupportedConfiguration,
    audit,
    eq1_threshold,
    mask_resize,
    remove_extra_labels,
)
from .metrics import (  # noqa: E402
    ConfusionMatrix,
    SegEvalReport,
    bf_score,
    class_metrics,
    confusion,
    dice,
    evaluate_corpus,
)
