"""Command-line front door: batch augmentation, mask thresholding,
run verification, and throughput benchmarking.

Exit codes: 0 success, 1 when per-item failures occurred, 2 on usage or
fatal errors. Flag overrides beat config-file values, which beat the
documented defaults; all randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as cfgmod
from .errors import ImageIOError
from .imagecore import load_saliency, save_mask, threshold_mask
from .pipeline import MANIFEST_NAME, RunManifest, discover_pairs, process_dataset
from .verifybench import measure_throughput, verify_run

_SALIENCY_SUFFIXES = (".png", ".pgm")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/diagnostics
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, ImageIOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fgbgaug",
        description="Deterministic foreground-noise / background-shuffle augmentation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_aug = sub.add_parser("augment", help="augment an image tree into an output tree")
    p_aug.add_argument("--images", required=True, type=Path)
    p_aug.add_argument("--masks", required=True, type=Path)
    p_aug.add_argument("--out", required=True, type=Path)
    p_aug.add_argument("--seed", required=True, type=_seed_arg)
    p_aug.add_argument("--config", type=Path, help="JSON config file")
    p_aug.add_argument("--workers", type=int, default=1)
    _add_override_flags(p_aug)
    p_aug.set_defaults(func=_cmd_augment)

    p_thr = sub.add_parser("mask-threshold", help="binarize saliency maps into masks")
    p_thr.add_argument("--saliency", required=True, type=Path)
    p_thr.add_argument("--out", required=True, type=Path)
    p_thr.add_argument("--theta", type=float, default=0.5)
    p_thr.set_defaults(func=_cmd_mask_threshold)

    p_ver = sub.add_parser("verify", help="audit an augmented tree against its manifest")
    p_ver.add_argument("--original", required=True, type=Path)
    p_ver.add_argument("--augmented", required=True, type=Path)
    p_ver.add_argument("--manifest", required=True, type=Path)
    p_ver.add_argument("--masks", type=Path, help="enable exact bytewise recomputation")
    p_ver.add_argument("--json", action="store_true")
    p_ver.set_defaults(func=_cmd_verify)

    p_bench = sub.add_parser("bench", help="measure augmentation throughput")
    p_bench.add_argument("--images", required=True, type=Path)
    p_bench.add_argument("--masks", required=True, type=Path)
    p_bench.add_argument("--seed", required=True, type=_seed_arg)
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--iterations", type=int, default=1)
    p_bench.add_argument("--config", type=Path)
    p_bench.add_argument("--json", action="store_true")
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("config overrides")
    group.add_argument("--rho", type=float)
    group.add_argument("--area-low", dest="area_low", type=float)
    group.add_argument("--area-high", dest="area_high", type=float)
    group.add_argument("--noise-mean", dest="noise_mean", type=float)
    group.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    group.add_argument("--patch-side-min-frac", dest="patch_side_min_frac", type=float)
    group.add_argument("--patch-side-max-frac", dest="patch_side_max_frac", type=float)
    group.add_argument(
        "--grid-divisions",
        dest="grid_divisions",
        type=_divisions_arg,
        help="comma-separated list, e.g. 2,4,8",
    )
    group.add_argument(
        "--enable-fpn", dest="enable_fpn", action=argparse.BooleanOptionalAction, default=None
    )
    group.add_argument(
        "--enable-bps", dest="enable_bps", action=argparse.BooleanOptionalAction, default=None
    )
    group.add_argument("--theta", type=float)
    group.add_argument(
        "--skip-missing", dest="skip_missing", action=argparse.BooleanOptionalAction, default=None
    )


def _seed_arg(text: str) -> int:
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _divisions_arg(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid divisions '{text}'") from exc


def _resolve_config(args: argparse.Namespace) -> dict:
    file_values = cfgmod.load_config_file(args.config) if args.config else None
    overrides = {
        key: getattr(args, key, None)
        for key in cfgmod.DEFAULTS
        if getattr(args, key, None) is not None
    }
    return cfgmod.resolve(file_values, overrides)


def _cmd_augment(args: argparse.Namespace) -> int:
    doc = _resolve_config(args)
    cfg = cfgmod.to_augment_config(doc)
    pairs, missing = discover_pairs(args.images, args.masks, skip_missing=doc["skip_missing"])
    manifest = process_dataset(
        pairs,
        cfg,
        args.seed,
        args.out,
        workers=args.workers,
        theta=doc["theta"],
        config_doc=doc,
        extra_failures=[(rel, "missing mask") for rel in missing],
    )
    print(
        f"augmented {manifest.processed} image(s), {len(manifest.failures)} failure(s); "
        f"manifest at {args.out / MANIFEST_NAME}"
    )
    for path, error in manifest.failures:
        print(f"failed: {path}: {error}", file=sys.stderr)
    return 1 if manifest.failures else 0


def _cmd_mask_threshold(args: argparse.Namespace) -> int:
    saliency_dir = args.saliency
    if not saliency_dir.is_dir():
        raise FileNotFoundError(f"not a directory: {saliency_dir}")
    rels = sorted(
        p.relative_to(saliency_dir).as_posix()
        for p in saliency_dir.rglob("*")
        if p.is_file() and p.suffix.lower() in _SALIENCY_SUFFIXES
    )
    failures = 0
    for rel in rels:
        try:
            mask = threshold_mask(load_saliency(saliency_dir / rel), args.theta)
            out_path = args.out / rel
            out_path.parent.mkdir(parents=True, exist_ok=True)
            save_mask(mask, out_path)
        except (ImageIOError, OSError) as exc:
            failures += 1
            print(f"failed: {rel}: {exc}", file=sys.stderr)
    print(f"thresholded {len(rels) - failures} map(s) at theta={args.theta}, {failures} failure(s)")
    return 1 if failures else 0


def _cmd_verify(args: argparse.Namespace) -> int:
    manifest = RunManifest.load(args.manifest)
    problems = verify_run(args.original, args.augmented, manifest, masks_dir=args.masks)
    if args.json:
        print(
            json.dumps(
                {
                    "checked": len(manifest.records),
                    "problems": [{"path": p.path, "detail": p.detail} for p in problems],
                },
                indent=2,
            )
        )
    else:
        for p in problems:
            print(f"problem: {p.path}: {p.detail}", file=sys.stderr)
        print(f"verified {len(manifest.records)} record(s), {len(problems)} problem(s)")
    return 1 if problems else 0


def _cmd_bench(args: argparse.Namespace) -> int:
    file_values = cfgmod.load_config_file(args.config) if args.config else None
    doc = cfgmod.resolve(file_values)
    cfg = cfgmod.to_augment_config(doc)
    pairs, _ = discover_pairs(args.images, args.masks)
    report = measure_throughput(
        pairs, cfg, args.workers, args.iterations, global_seed=args.seed, theta=doc["theta"]
    )
    if args.json:
        print(
            json.dumps(
                {
                    "images_per_sec": report.images_per_sec,
                    "images": report.images,
                    "iterations": report.iterations,
                    "workers": report.workers,
                    "per_stage_seconds": report.per_stage,
                },
                indent=2,
            )
        )
    else:
        print(
            f"{report.images_per_sec:.2f} images/sec "
            f"({report.images} images x {report.iterations} iteration(s), "
            f"{report.workers} worker(s))"
        )
        for stage, seconds in report.per_stage.items():
            print(f"  {stage:>9}: {seconds * 1000:.1f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
