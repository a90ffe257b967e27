"""Statistical verification of the stochastic contracts, run auditing,
and throughput measurement."""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .augment import (
    AugmentConfig,
    AugRecord,
    augment_regions,
    composite,
    sample_noise_area,
    select_noise_patches,
    shuffle_patches,
    apply_patch_noise,
)
from .errors import DimensionMismatchError, ImageIOError
from .imagecore import (
    BinaryMask,
    Image,
    load_image,
    load_saliency,
    save_image,
    threshold_mask,
    validate_pair,
)
from .pipeline import DatasetPair, RunManifest, derive_seed, find_mask, process_dataset
from .rng import RngStream


@dataclass
class GateReport:
    """Observed apply-rate of the probability gate over repeated trials."""

    trials: int
    applied: int
    rho: float
    in_bounds: bool

    @property
    def fraction(self) -> float:
        return self.applied / self.trials


@dataclass
class CoverageReport:
    """Pixel accounting of one noise-stage run."""

    nominal_area: float
    union_altered: int
    fg_altered: int
    bounds_ok: bool


@dataclass
class ThroughputReport:
    images_per_sec: float
    per_stage: dict[str, float]
    images: int
    iterations: int
    workers: int


def estimate_gate_rate(cfg: AugmentConfig, trials: int, seed: int) -> GateReport:
    """Run the gate draw on ``trials`` fresh derived streams.

    Stream i is seeded with derive_seed(seed, "gate/i"). The bound is the
    binomial three-sigma interval around rho, which at rho in (0, 1)
    fails a correct gate only ~0.3% of the time but reliably catches an
    off-by-one comparison.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    applied = 0
    for i in range(trials):
        stream = RngStream(derive_seed(seed, f"gate/{i}"))
        if stream.random() < cfg.rho:
            applied += 1
    bound = 3.0 * math.sqrt(cfg.rho * (1.0 - cfg.rho) / trials)
    in_bounds = abs(applied / trials - cfg.rho) <= bound
    return GateReport(trials=trials, applied=applied, rho=cfg.rho, in_bounds=in_bounds)


def verify_shuffle_integrity(original: Image, shuffled: Image, division: int) -> bool:
    """True iff ``shuffled`` is a patch permutation of ``original``.

    Checks that the multiset of grid patches matches and that the
    residual right/bottom borders are bitwise unchanged.
    """
    if (original.height, original.width) != (shuffled.height, shuffled.width):
        raise DimensionMismatchError(
            f"shuffle integrity: {original.width}x{original.height} vs "
            f"{shuffled.width}x{shuffled.height}"
        )
    if division < 1:
        raise ValueError(f"grid division must be >= 1, got {division}")
    ph = original.height // division
    pw = original.width // division
    if ph == 0 or pw == 0:
        raise ValueError(f"division {division} leaves an empty patch")
    if not np.array_equal(
        original.pixels[:, pw * division :], shuffled.pixels[:, pw * division :]
    ):
        return False
    if not np.array_equal(
        original.pixels[ph * division :, : pw * division],
        shuffled.pixels[ph * division :, : pw * division],
    ):
        return False
    return sorted(_patch_bytes(original, division, ph, pw)) == sorted(
        _patch_bytes(shuffled, division, ph, pw)
    )


def _patch_bytes(img: Image, division: int, ph: int, pw: int) -> list[bytes]:
    return [
        img.pixels[gy * ph : (gy + 1) * ph, gx * pw : (gx + 1) * pw].tobytes()
        for gy in range(division)
        for gx in range(division)
    ]


def noise_coverage_report(
    img: Image, mask: BinaryMask, cfg: AugmentConfig, seed: int
) -> CoverageReport:
    """Run one gated augmentation and account for its noise coverage.

    When the gate passes the image through (or the noise stage is off)
    every count is zero. Otherwise checks that altered-pixel counts nest
    (foreground <= union <= sum of rect areas), that the sampled area
    honors [area_low, area_high] x image area, and that the cumulative
    rect area stopped in [A, A + largest rect area).
    """
    validate_pair(img, mask)
    stream = RngStream(seed)
    _, _, record = augment_regions(img, cfg, stream)
    if not record.applied or record.sampled_area is None:
        return CoverageReport(nominal_area=0.0, union_altered=0, fg_altered=0, bounds_ok=True)

    covered = np.zeros((img.height, img.width), dtype=bool)
    for r in record.noise_rects:
        covered[r.y : r.y + r.h, r.x : r.x + r.w] = True
    union = int(covered.sum())
    fg = int((covered & mask.bits).sum())

    area = record.sampled_area
    total = sum(r.area for r in record.noise_rects)
    image_area = float(img.width * img.height)
    area_ok = cfg.area_low * image_area <= area <= cfg.area_high * image_area
    if record.noise_rects:
        largest = max(r.area for r in record.noise_rects)
        cumulative_ok = area <= total < area + largest
    else:
        cumulative_ok = area == 0.0
    bounds_ok = fg <= union <= total and area_ok and cumulative_ok
    return CoverageReport(nominal_area=area, union_altered=union, fg_altered=fg, bounds_ok=bounds_ok)


def measure_throughput(
    pairs: list[DatasetPair],
    cfg: AugmentConfig,
    workers: int,
    iterations: int,
    global_seed: int = 0,
    theta: float = 0.5,
) -> ThroughputReport:
    """End-to-end images/second over full pipeline passes.

    The headline rate times ``iterations`` process_dataset passes through
    the worker pool (outputs go to a scratch directory). The per-stage
    seconds come from one additional instrumented single-threaded pass,
    since codec time dominates real pipelines and deserves its own line.
    """
    if not pairs:
        raise ValueError("cannot benchmark an empty pair list")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")

    per_stage = _stage_breakdown(pairs, cfg, global_seed, theta)

    with tempfile.TemporaryDirectory(prefix="fgbgaug-bench-") as scratch:
        start = time.perf_counter()
        for i in range(iterations):
            process_dataset(
                pairs, cfg, global_seed, Path(scratch) / f"pass{i}", workers=workers, theta=theta
            )
        elapsed = time.perf_counter() - start
    rate = len(pairs) * iterations / elapsed if elapsed > 0 else float("inf")
    return ThroughputReport(
        images_per_sec=rate,
        per_stage=per_stage,
        images=len(pairs),
        iterations=iterations,
        workers=workers,
    )


def _stage_breakdown(
    pairs: list[DatasetPair], cfg: AugmentConfig, global_seed: int, theta: float
) -> dict[str, float]:
    stages = {"decode": 0.0, "fpn": 0.0, "bps": 0.0, "composite": 0.0, "encode": 0.0}
    with tempfile.TemporaryDirectory(prefix="fgbgaug-stage-") as scratch:
        for idx, pair in enumerate(sorted(pairs, key=lambda p: p.rel)):
            t0 = time.perf_counter()
            img = load_image(pair.image_path)
            mask = threshold_mask(load_saliency(pair.mask_path), theta)
            t1 = time.perf_counter()
            stages["decode"] += t1 - t0

            validate_pair(img, mask)
            stream = RngStream(derive_seed(global_seed, pair.rel))
            p1 = stream.random()
            out = img
            if p1 < cfg.rho:
                i_fg = img
                t2 = time.perf_counter()
                if cfg.enable_fpn:
                    area = sample_noise_area(stream, cfg, float(img.width * img.height))
                    rects = select_noise_patches(stream, cfg, img.width, img.height, area)
                    i_fg = apply_patch_noise(img, rects, stream, cfg)
                t3 = time.perf_counter()
                stages["fpn"] += t3 - t2
                i_bg = img
                if cfg.enable_bps:
                    division = cfg.grid_divisions[stream.randbelow(len(cfg.grid_divisions))]
                    i_bg, _ = shuffle_patches(img, division, stream)
                t4 = time.perf_counter()
                stages["bps"] += t4 - t3
                out = composite(i_fg, i_bg, mask)
                stages["composite"] += time.perf_counter() - t4

            t5 = time.perf_counter()
            save_image(out, Path(scratch) / f"{idx}{Path(pair.rel).suffix}")
            stages["encode"] += time.perf_counter() - t5
    return stages


@dataclass
class RunProblem:
    path: str
    detail: str


def verify_run(
    original_dir: str | Path,
    augmented_dir: str | Path,
    manifest: RunManifest,
    masks_dir: str | Path | None = None,
) -> list[RunProblem]:
    """Audit an augmentation run against its manifest.

    For each record the expected noised and shuffled images are recomputed
    from the recorded stream seed, then: the seed must match the derived
    seed, the recomputed record must equal the stored one, passthrough
    outputs must equal their inputs byte for byte, applied outputs must be
    explainable pixel-by-pixel by the mask composite, and the recomputed
    shuffle must be patch-multiset-clean. With ``masks_dir`` the composite
    is also recomputed exactly and compared bytewise.
    """
    original_dir = Path(original_dir)
    augmented_dir = Path(augmented_dir)
    from .config import to_augment_config

    cfg = to_augment_config(manifest.config)
    theta = float(manifest.config.get("theta", 0.5))
    problems: list[RunProblem] = []

    for rel, record in sorted(manifest.records.items()):
        try:
            problems.extend(
                _verify_record(
                    original_dir, augmented_dir, masks_dir, rel, record, cfg, theta, manifest
                )
            )
        except (FileNotFoundError, ImageIOError, DimensionMismatchError) as exc:
            problems.append(RunProblem(rel, str(exc)))
    return problems


def _verify_record(
    original_dir: Path,
    augmented_dir: Path,
    masks_dir: str | Path | None,
    rel: str,
    record: AugRecord,
    cfg: AugmentConfig,
    theta: float,
    manifest: RunManifest,
) -> list[RunProblem]:
    problems: list[RunProblem] = []
    expected_seed = derive_seed(manifest.global_seed, rel)
    if record.stream_seed != expected_seed:
        problems.append(
            RunProblem(rel, f"stream seed {record.stream_seed} != derived {expected_seed}")
        )

    original = load_image(original_dir / rel)
    augmented = load_image(augmented_dir / rel)
    if (original.height, original.width) != (augmented.height, augmented.width):
        problems.append(RunProblem(rel, "augmented output has different dimensions"))
        return problems

    stream = RngStream(record.stream_seed)
    i_fg, i_bg, recomputed = augment_regions(original, cfg, stream)
    if _record_key(recomputed) != _record_key(record):
        problems.append(RunProblem(rel, "stored record does not match recomputation"))
        return problems

    if not record.applied:
        if not np.array_equal(augmented.pixels, original.pixels):
            problems.append(RunProblem(rel, "passthrough output differs from input"))
        return problems

    problems.extend(_check_record_consistency(rel, record, original))

    fg_match = (augmented.pixels == i_fg.pixels).all(axis=2)
    bg_match = (augmented.pixels == i_bg.pixels).all(axis=2)
    unexplained = ~(fg_match | bg_match)
    if unexplained.any():
        ys, xs = np.nonzero(unexplained)
        problems.append(
            RunProblem(
                rel,
                f"{int(unexplained.sum())} pixel(s) match neither region, "
                f"first at ({int(xs[0])}, {int(ys[0])})",
            )
        )

    if record.grid_division is not None and not verify_shuffle_integrity(
        original, i_bg, record.grid_division
    ):
        problems.append(RunProblem(rel, "recomputed shuffle fails patch-multiset check"))

    if masks_dir is not None:
        mask_path = find_mask(Path(masks_dir), rel)
        if mask_path is None:
            problems.append(RunProblem(rel, f"no mask found under {masks_dir}"))
        else:
            mask = threshold_mask(load_saliency(mask_path), theta)
            validate_pair(original, mask)
            exact = composite(i_fg, i_bg, mask)
            if not np.array_equal(exact.pixels, augmented.pixels):
                problems.append(RunProblem(rel, "output differs from exact recomputation"))
    return problems


def _check_record_consistency(rel: str, record: AugRecord, img: Image) -> list[RunProblem]:
    problems: list[RunProblem] = []
    if record.permutation is not None:
        n = len(record.permutation)
        expected_n = (record.grid_division or 0) ** 2
        if n != expected_n or sorted(record.permutation) != list(range(n)):
            problems.append(RunProblem(rel, "permutation is not a bijection on its grid"))
    for r in record.noise_rects:
        if r.x + r.w > img.width or r.y + r.h > img.height:
            problems.append(RunProblem(rel, f"noise rect {r} out of bounds"))
            break
    return problems


def _record_key(record: AugRecord) -> tuple:
    return (
        record.gate_value,
        record.applied,
        record.sampled_area,
        tuple(record.noise_rects),
        record.grid_division,
        None if record.permutation is None else tuple(record.permutation),
        record.stream_seed,
    )
