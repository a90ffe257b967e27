"""Deterministic dual-region image augmentation.

Foreground pixels get random Gaussian noise patches, background pixels
get grid-shuffled, and a binary mask stitches the two back together.
Everything is driven by a pinned 64-bit random stream so batch outputs
are byte-reproducible.
"""

from .augment import (
    AugmentConfig,
    AugRecord,
    Rect,
    apply_patch_noise,
    augment_one,
    augment_regions,
    composite,
    sample_noise_area,
    select_noise_patches,
    shuffle_patches,
)
from .errors import (
    CorruptImageError,
    DimensionMismatchError,
    ImageIOError,
    UnsupportedImageError,
)
from .imagecore import (
    BinaryMask,
    Image,
    SaliencyMap,
    load_image,
    load_saliency,
    save_image,
    save_mask,
    threshold_mask,
    validate_pair,
)
from .pipeline import (
    DatasetPair,
    RunManifest,
    derive_seed,
    discover_pairs,
    fnv1a64,
    process_dataset,
)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig",
    "AugRecord",
    "BinaryMask",
    "CorruptImageError",
    "DatasetPair",
    "DimensionMismatchError",
    "Image",
    "ImageIOError",
    "Rect",
    "RngStream",
    "RunManifest",
    "SaliencyMap",
    "UnsupportedImageError",
    "apply_patch_noise",
    "augment_one",
    "augment_regions",
    "composite",
    "derive_seed",
    "discover_pairs",
    "fnv1a64",
    "load_image",
    "load_saliency",
    "process_dataset",
    "sample_noise_area",
    "save_image",
    "save_mask",
    "select_noise_patches",
    "shuffle_patches",
    "threshold_mask",
    "validate_pair",
]
