"""Dual-region augmentation kernels and their gated composition.

One call works on one (image, mask) pair: noise patches are scattered
over the whole image, the whole image is grid-shuffled, and the mask then
chooses the noised version for foreground pixels and the shuffled version
for background pixels. Because shuffling happens before the mask is
applied, foreground fragments can end up in the background; the reverse
never happens.

Randomness consumption order is pinned (see :func:`augment_regions`):
gate draw, area fraction, per-patch side/x/y, per-patch noise values in
row-major pixel-then-channel order, grid division choice, Fisher-Yates
swaps. A disabled stage consumes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imagecore import BinaryMask, Image, validate_pair
from .errors import DimensionMismatchError
from .rng import RngStream


@dataclass(frozen=True)
class AugmentConfig:
    """All knobs of the augmentation, with paper-default values.

    ``rho`` is the probability that a given image is augmented at all.
    ``area_low``/``area_high`` bound the fraction of image area nominally
    covered by noise patches. Noise replaces covered pixels with
    clamp(N(noise_mean, noise_sigma), 0, 1) per channel. Noise patches are
    squares with side a uniform fraction of min(width, height).
    ``grid_divisions`` are the candidate patches-per-side counts for the
    background shuffle. The two enable flags isolate either stage.
    """

    rho: float = 0.5
    area_low: float = 0.02
    area_high: float = 0.40
    noise_mean: float = 0.5
    noise_sigma: float = 0.25
    patch_side_min_frac: float = 0.0625
    patch_side_max_frac: float = 0.25
    grid_divisions: tuple[int, ...] = (2, 4, 8)
    enable_fpn: bool = True
    enable_bps: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if not 0.0 <= self.area_low <= self.area_high <= 1.0:
            raise ValueError(
                f"need 0 <= area_low <= area_high <= 1, got [{self.area_low}, {self.area_high}]"
            )
        if self.noise_sigma < 0.0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0.0 < self.patch_side_min_frac <= self.patch_side_max_frac <= 1.0:
            raise ValueError(
                "need 0 < patch_side_min_frac <= patch_side_max_frac <= 1, got "
                f"[{self.patch_side_min_frac}, {self.patch_side_max_frac}]"
            )
        divisions = tuple(sorted(set(int(d) for d in self.grid_divisions)))
        if not divisions:
            raise ValueError("grid_divisions must be non-empty")
        if divisions[0] < 1:
            raise ValueError(f"grid divisions must be >= 1, got {divisions}")
        # normalized to a sorted unique tuple so the pinned choice
        # rng index -> division does not depend on input ordering
        object.__setattr__(self, "grid_divisions", divisions)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned patch; (x, y) is the top-left corner, fully in bounds."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < 1 or self.h < 1 or self.x < 0 or self.y < 0:
            raise ValueError(f"degenerate rect {self}")

    @property
    def area(self) -> int:
        return self.w * self.h


@dataclass
class AugRecord:
    """Provenance of one augmentation call, enough to re-verify it.

    ``sampled_area`` is None when the noise stage did not run (gate closed
    or stage disabled); likewise ``grid_division``/``permutation`` for the
    shuffle stage. ``stream_seed`` is the seed the RngStream was built
    with, so a fresh stream reproduces the call exactly.
    """

    gate_value: float
    applied: bool
    sampled_area: float | None = None
    noise_rects: list[Rect] = field(default_factory=list)
    grid_division: int | None = None
    permutation: list[int] | None = None
    stream_seed: int = 0


def record_to_dict(record: AugRecord) -> dict:
    """JSON-ready dict; the seed becomes a decimal string to survive
    readers that parse numbers as 53-bit floats."""
    return {
        "gate_value": record.gate_value,
        "applied": record.applied,
        "sampled_area": record.sampled_area,
        "noise_rects": [{"x": r.x, "y": r.y, "w": r.w, "h": r.h} for r in record.noise_rects],
        "grid_division": record.grid_division,
        "permutation": None if record.permutation is None else list(record.permutation),
        "stream_seed": str(record.stream_seed),
    }


def record_from_dict(doc: dict) -> AugRecord:
    return AugRecord(
        gate_value=float(doc["gate_value"]),
        applied=bool(doc["applied"]),
        sampled_area=None if doc["sampled_area"] is None else float(doc["sampled_area"]),
        noise_rects=[Rect(r["x"], r["y"], r["w"], r["h"]) for r in doc["noise_rects"]],
        grid_division=doc["grid_division"],
        permutation=None if doc["permutation"] is None else [int(i) for i in doc["permutation"]],
        stream_seed=int(doc["stream_seed"]),
    )


def sample_noise_area(rng: RngStream, cfg: AugmentConfig, image_area: float) -> float:
    """Nominal noise area: u ~ U[area_low, area_high] times the image area."""
    return rng.uniform(cfg.area_low, cfg.area_high) * image_area


def select_noise_patches(
    rng: RngStream, cfg: AugmentConfig, width: int, height: int, area: float
) -> list[Rect]:
    """Draw square patches until their cumulative area first reaches ``area``.

    Per patch the draws are side, x, y. The side is uniform over
    [patch_side_min_frac, patch_side_max_frac] * min(width, height),
    rounded half-up with a floor of 1 pixel; the top-left corner is
    uniform over positions where the square fits unclipped. Overlaps are
    allowed, and the last patch may overshoot by at most its own area.
    Returns no patches iff ``area`` is 0.
    """
    shorter = min(width, height)
    rects: list[Rect] = []
    covered = 0
    while covered < area:
        side_f = rng.uniform(cfg.patch_side_min_frac * shorter, cfg.patch_side_max_frac * shorter)
        side = max(1, int(np.floor(side_f + 0.5)))
        x = rng.randbelow(width - side + 1)
        y = rng.randbelow(height - side + 1)
        rects.append(Rect(x, y, side, side))
        covered += side * side
    return rects


def apply_patch_noise(
    img: Image, rects: list[Rect], rng: RngStream, cfg: AugmentConfig
) -> Image:
    """Replace every pixel under ``rects`` with clamped Gaussian noise.

    Each covered pixel channel independently becomes
    round(clamp(N(noise_mean, noise_sigma), 0, 1) * 255), half-up. Noise
    is drawn per rect in row-major (row, column, channel) order; where
    rects overlap the later rect wins. Draws happen for every cell of
    every rect, overlap or not, so consumption depends only on rect sizes.
    """
    out = img.pixels.copy()
    for r in rects:
        if r.x + r.w > img.width or r.y + r.h > img.height:
            raise ValueError(f"rect {r} exceeds {img.width}x{img.height} bounds")
        values = rng.normals(r.h * r.w * 3, cfg.noise_mean, cfg.noise_sigma)
        out[r.y : r.y + r.h, r.x : r.x + r.w, :] = _quantize(values).reshape(r.h, r.w, 3)
    return Image(out)


def shuffle_patches(img: Image, division: int, rng: RngStream) -> tuple[Image, list[int]]:
    """Permute the division x division grid of floor-sized patches.

    Patch size is (height // division, width // division); the grid is
    anchored at the top-left and any residual right/bottom border stays in
    place. Returns the shuffled image and the permutation ``perm`` where
    output grid slot i (row-major) received input patch ``perm[i]``.
    """
    if division < 1:
        raise ValueError(f"grid division must be >= 1, got {division}")
    ph = img.height // division
    pw = img.width // division
    if ph == 0 or pw == 0:
        raise ValueError(
            f"division {division} leaves an empty patch on a {img.width}x{img.height} image"
        )
    perm = rng.shuffle_indices(division * division)
    src = img.pixels
    out = src.copy()
    core = src[: ph * division, : pw * division]
    blocks = (
        core.reshape(division, ph, division, pw, 3)
        .swapaxes(1, 2)
        .reshape(division * division, ph, pw, 3)
    )
    out[: ph * division, : pw * division] = (
        blocks[np.asarray(perm)]
        .reshape(division, division, ph, pw, 3)
        .swapaxes(1, 2)
        .reshape(ph * division, pw * division, 3)
    )
    return Image(out), perm


def composite(i_fg: Image, i_bg: Image, mask: BinaryMask) -> Image:
    """Per-pixel select: foreground image where mask is set, else background."""
    if not (
        i_fg.height == i_bg.height == mask.height and i_fg.width == i_bg.width == mask.width
    ):
        raise DimensionMismatchError(
            f"composite inputs disagree: fg {i_fg.width}x{i_fg.height}, "
            f"bg {i_bg.width}x{i_bg.height}, mask {mask.width}x{mask.height}"
        )
    return Image(np.where(mask.bits[:, :, np.newaxis], i_fg.pixels, i_bg.pixels))


def augment_regions(
    img: Image, cfg: AugmentConfig, rng: RngStream
) -> tuple[Image, Image, AugRecord]:
    """Run the gate and both region kernels, deferring the mask composite.

    Draw order: (1) gate value p1; if p1 >= rho nothing else is consumed
    and both returned images are the input. Otherwise (2) area fraction,
    (3) per-patch side/x/y, (4) per-patch noise — skipped entirely when
    the noise stage is disabled — then (5) grid division index and
    (6) shuffle swaps, skipped when the shuffle stage is disabled.
    """
    p1 = rng.random()
    if p1 >= cfg.rho:
        return img, img, AugRecord(gate_value=p1, applied=False, stream_seed=rng.seed)

    area: float | None = None
    rects: list[Rect] = []
    i_fg = img
    if cfg.enable_fpn:
        area = sample_noise_area(rng, cfg, float(img.width * img.height))
        rects = select_noise_patches(rng, cfg, img.width, img.height, area)
        i_fg = apply_patch_noise(img, rects, rng, cfg)

    division: int | None = None
    perm: list[int] | None = None
    i_bg = img
    if cfg.enable_bps:
        division = cfg.grid_divisions[rng.randbelow(len(cfg.grid_divisions))]
        i_bg, perm = shuffle_patches(img, division, rng)

    record = AugRecord(
        gate_value=p1,
        applied=True,
        sampled_area=area,
        noise_rects=rects,
        grid_division=division,
        permutation=perm,
        stream_seed=rng.seed,
    )
    return i_fg, i_bg, record


def augment_one(
    img: Image, mask: BinaryMask, cfg: AugmentConfig, rng: RngStream
) -> tuple[Image, AugRecord]:
    """Full augmentation of one pair; pure in (pixels, mask, cfg, seed).

    The record's ``stream_seed`` replays the call only if ``rng`` was
    freshly constructed, which is how the batch pipeline always calls it.
    """
    validate_pair(img, mask)
    i_fg, i_bg, record = augment_regions(img, cfg, rng)
    if not record.applied:
        return img, record
    return composite(i_fg, i_bg, mask), record


def _quantize(values: np.ndarray) -> np.ndarray:
    # clamp to [0, 1] then round half-up onto the 8-bit grid
    return np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
