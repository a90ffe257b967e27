"""Array-level wrapper around the fgbgaug core for use inside training loops.

Images travel as (h, w, 3) uint8 numpy arrays and masks as 2-D boolean
arrays; configuration is the same flat mapping the CLI accepts. Calls are
stateless — a fresh random stream is built from the given seed every
time — so for any (image, mask, config, seed) the output bytes are
identical to what the batch CLI writes for that stream seed.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from fgbgaug import BinaryMask, Image, RngStream, SaliencyMap
from fgbgaug import augment_one as _augment_one
from fgbgaug import threshold_mask as _threshold_mask
from fgbgaug.augment import record_to_dict
from fgbgaug.config import to_augment_config, validate_values

__version__ = "0.1.0"

__all__ = ["augment", "threshold_mask"]


def augment(
    image: np.ndarray,
    mask: np.ndarray,
    config: Mapping | None = None,
    seed: int = 0,
) -> tuple[np.ndarray, dict]:
    """Augment one image; returns (pixels, provenance record).

    ``config`` may hold any subset of the CLI config keys (unknown keys
    are rejected; ``theta``/``skip_missing`` are accepted but have no
    effect here since the mask is already binary). The record is the same
    mapping the batch manifest stores for this image.
    """
    img_arr = np.asarray(image)
    if img_arr.dtype != np.uint8 or img_arr.ndim != 3 or img_arr.shape[2] != 3:
        raise ValueError(
            f"image must be a (h, w, 3) uint8 array, got shape {img_arr.shape} "
            f"dtype {img_arr.dtype}"
        )
    mask_arr = np.asarray(mask)
    if mask_arr.dtype != np.bool_ or mask_arr.ndim != 2:
        raise ValueError(
            f"mask must be a 2-D boolean array, got shape {mask_arr.shape} "
            f"dtype {mask_arr.dtype}"
        )
    cfg = to_augment_config(validate_values(dict(config or {})))
    out, record = _augment_one(
        Image(img_arr), BinaryMask(mask_arr), cfg, RngStream(int(seed))
    )
    return out.pixels, record_to_dict(record)


def threshold_mask(saliency: np.ndarray, theta: float = 0.5) -> np.ndarray:
    """Binarize a 2-D saliency array in [0, 1]: True where value >= theta."""
    sal = np.asarray(saliency, dtype=np.float64)
    if sal.ndim != 2:
        raise ValueError(f"saliency must be a 2-D array, got shape {sal.shape}")
    return _threshold_mask(SaliencyMap(sal), float(theta)).bits
