"""Dataset discovery, deterministic batch processing, and run manifests.

Every image gets its own random stream seeded from the global seed and
its relative path, so outputs are byte-identical no matter how many
workers run or in what order items complete.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

from .augment import AugmentConfig, AugRecord, augment_one, record_from_dict, record_to_dict
from .errors import ImageIOError, DimensionMismatchError
from .imagecore import load_image, load_saliency, save_image, threshold_mask, validate_pair
from .rng import RngStream

FNV_OFFSET_BASIS = 0xCBF29CE484222325  # 14695981039346656037
FNV_PRIME = 0x100000001B3  # 1099511628211
_M64 = (1 << 64) - 1

IMAGE_SUFFIXES = (".png", ".ppm")
MASK_SUFFIXES = (".pgm", ".png")

MANIFEST_NAME = "manifest.json"


def fnv1a64(data: bytes) -> int:
    """FNV-1a over ``data`` with the standard 64-bit basis and prime."""
    acc = FNV_OFFSET_BASIS
    for byte in data:
        acc ^= byte
        acc = (acc * FNV_PRIME) & _M64
    return acc


def derive_seed(global_seed: int, rel_path: str) -> int:
    """Per-item stream seed: global_seed XOR FNV-1a-64(rel_path utf-8 bytes)."""
    return (global_seed & _M64) ^ fnv1a64(rel_path.encode("utf-8"))


@dataclass(frozen=True)
class DatasetPair:
    """One image/mask pairing. ``rel`` is the image path relative to its
    dataset root, '/'-separated on every platform; it keys seeds, records,
    and the mirrored output location."""

    image_path: Path
    mask_path: Path
    rel: str


@dataclass
class RunManifest:
    """Everything needed to audit or replay a batch run."""

    global_seed: int
    config: dict
    processed: int
    failures: list[tuple[str, str]] = field(default_factory=list)
    records: dict[str, AugRecord] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "global_seed": str(self.global_seed),
            "config": self.config,
            "processed": self.processed,
            "failures": [{"path": p, "error": e} for p, e in self.failures],
            "records": {rel: record_to_dict(rec) for rel, rec in self.records.items()},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RunManifest":
        return cls(
            global_seed=int(doc["global_seed"]),
            config=dict(doc["config"]),
            processed=int(doc["processed"]),
            failures=[(f["path"], f["error"]) for f in doc["failures"]],
            records={rel: record_from_dict(rd) for rel, rd in doc["records"].items()},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def find_mask(mask_dir: Path, rel: str) -> Path | None:
    """The mask file sharing ``rel``'s stem under ``mask_dir``, or None.

    Raises if more than one candidate suffix exists; an ambiguous dataset
    is a defect, not something to resolve silently.
    """
    base = PurePosixPath(rel)
    hits = [
        mask_dir / base.with_suffix(suffix)
        for suffix in MASK_SUFFIXES
        if (mask_dir / base.with_suffix(suffix)).is_file()
    ]
    if len(hits) > 1:
        raise ValueError(f"ambiguous masks for '{base.with_suffix('')}': {sorted(map(str, hits))}")
    return hits[0] if hits else None


def discover_pairs(
    image_dir: str | Path, mask_dir: str | Path, skip_missing: bool = False
) -> tuple[list[DatasetPair], list[str]]:
    """Pair every supported image under ``image_dir`` with its mask.

    Pairs come back sorted by relative path. An image without a mask
    raises unless ``skip_missing``, in which case its rel path lands in
    the second return value for the caller to record.
    """
    image_dir = Path(image_dir)
    mask_dir = Path(mask_dir)
    for d in (image_dir, mask_dir):
        if not d.is_dir():
            raise FileNotFoundError(f"not a directory: {d}")

    rels = sorted(
        p.relative_to(image_dir).as_posix()
        for p in image_dir.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    pairs: list[DatasetPair] = []
    missing: list[str] = []
    for rel in rels:
        mask_path = find_mask(mask_dir, rel)
        if mask_path is None:
            if skip_missing:
                missing.append(rel)
                continue
            stem = PurePosixPath(rel).with_suffix("")
            raise FileNotFoundError(f"missing mask for '{stem}' under {mask_dir}")
        pairs.append(DatasetPair(image_path=image_dir / rel, mask_path=mask_path, rel=rel))
    return pairs, missing


def process_dataset(
    pairs: list[DatasetPair],
    cfg: AugmentConfig,
    global_seed: int,
    out_dir: str | Path,
    workers: int = 1,
    theta: float = 0.5,
    config_doc: dict | None = None,
    extra_failures: list[tuple[str, str]] | None = None,
) -> RunManifest:
    """Augment every pair into a mirrored tree under ``out_dir``.

    Each item runs on a fresh stream seeded by
    ``derive_seed(global_seed, rel)``; per-item load/validate errors are
    recorded and processing continues, while output I/O errors abort the
    run. The manifest is written to out_dir/manifest.json. ``config_doc``
    is embedded verbatim as the manifest's config (defaults to the
    AugmentConfig fields plus theta).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    tasks = [
        (str(p.image_path), str(p.mask_path), p.rel, cfg, theta, global_seed, str(out_dir))
        for p in sorted(pairs, key=lambda p: p.rel)
    ]
    if workers == 1 or len(tasks) <= 1:
        results = [_process_pair(t) for t in tasks]
    else:
        # batch tasks to keep executor IPC off the critical path
        chunksize = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_process_pair, tasks, chunksize=chunksize))

    records: dict[str, AugRecord] = {}
    failures: list[tuple[str, str]] = list(extra_failures or [])
    for status, rel, payload in results:
        if status == "ok":
            records[rel] = payload
        elif status == "failed":
            failures.append((rel, payload))
        else:
            raise OSError(f"fatal output error for '{rel}': {payload}")

    if config_doc is None:
        config_doc = _default_config_doc(cfg, theta)
    manifest = RunManifest(
        global_seed=global_seed,
        config=config_doc,
        processed=len(records),
        failures=sorted(failures),
        records=dict(sorted(records.items())),
    )
    manifest.save(out_dir / MANIFEST_NAME)
    return manifest


def _process_pair(task: tuple) -> tuple[str, str, AugRecord | str]:
    image_path, mask_path, rel, cfg, theta, global_seed, out_root = task
    try:
        img = load_image(image_path)
        mask = threshold_mask(load_saliency(mask_path), theta)
        validate_pair(img, mask)
        rng = RngStream(derive_seed(global_seed, rel))
        out_img, record = augment_one(img, mask, cfg, rng)
    except (FileNotFoundError, ImageIOError, DimensionMismatchError, ValueError) as exc:
        return "failed", rel, str(exc)
    try:
        out_path = Path(out_root) / rel
        out_path.parent.mkdir(parents=True, exist_ok=True)
        save_image(out_img, out_path)
    except OSError as exc:
        return "fatal", rel, str(exc)
    return "ok", rel, record


def _default_config_doc(cfg: AugmentConfig, theta: float) -> dict:
    doc = {
        "rho": cfg.rho,
        "area_low": cfg.area_low,
        "area_high": cfg.area_high,
        "noise_mean": cfg.noise_mean,
        "noise_sigma": cfg.noise_sigma,
        "patch_side_min_frac": cfg.patch_side_min_frac,
        "patch_side_max_frac": cfg.patch_side_max_frac,
        "grid_divisions": list(cfg.grid_divisions),
        "enable_fpn": cfg.enable_fpn,
        "enable_bps": cfg.enable_bps,
        "theta": theta,
    }
    return doc
