"""Flat JSON run-configuration schema.

One document drives the CLI, gets embedded in run manifests, and is
accepted by the scripting bindings. Missing keys take the defaults below;
unknown keys are rejected rather than ignored so typos cannot silently
change a run.
"""

from __future__ import annotations

import json
from pathlib import Path

from .augment import AugmentConfig

DEFAULTS: dict = {
    "rho": 0.5,
    "area_low": 0.02,
    "area_high": 0.40,
    "noise_mean": 0.5,
    "noise_sigma": 0.25,
    "patch_side_min_frac": 0.0625,
    "patch_side_max_frac": 0.25,
    "grid_divisions": [2, 4, 8],
    "enable_fpn": True,
    "enable_bps": True,
    "theta": 0.5,
    "skip_missing": False,
}

AUGMENT_KEYS = (
    "rho",
    "area_low",
    "area_high",
    "noise_mean",
    "noise_sigma",
    "patch_side_min_frac",
    "patch_side_max_frac",
    "grid_divisions",
    "enable_fpn",
    "enable_bps",
)

_BOOL_KEYS = ("enable_fpn", "enable_bps", "skip_missing")
_FLOAT_KEYS = (
    "rho",
    "area_low",
    "area_high",
    "noise_mean",
    "noise_sigma",
    "patch_side_min_frac",
    "patch_side_max_frac",
    "theta",
)


def validate_values(doc: dict) -> dict:
    """Type-check a (partial) config document; returns it normalized."""
    unknown = sorted(set(doc) - set(DEFAULTS))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    out = dict(doc)
    for key in _BOOL_KEYS:
        if key in out and not isinstance(out[key], bool):
            raise ValueError(f"config key '{key}' must be a boolean, got {out[key]!r}")
    for key in _FLOAT_KEYS:
        if key in out:
            if isinstance(out[key], bool) or not isinstance(out[key], (int, float)):
                raise ValueError(f"config key '{key}' must be a number, got {out[key]!r}")
            out[key] = float(out[key])
    if "grid_divisions" in out:
        divisions = out["grid_divisions"]
        if (
            not isinstance(divisions, (list, tuple))
            or not divisions
            or not all(isinstance(d, int) and not isinstance(d, bool) for d in divisions)
        ):
            raise ValueError(
                f"config key 'grid_divisions' must be a non-empty list of integers, got {divisions!r}"
            )
        out["grid_divisions"] = [int(d) for d in divisions]
    if "theta" in out and not 0.0 <= out["theta"] <= 1.0:
        raise ValueError(f"config key 'theta' must be in [0, 1], got {out['theta']}")
    return out


def load_config_file(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    return validate_values(doc)


def resolve(
    file_values: dict | None = None, overrides: dict | None = None
) -> dict:
    """Defaults, overlaid by config-file values, overlaid by CLI overrides."""
    doc = dict(DEFAULTS)
    doc.update(validate_values(file_values or {}))
    doc.update(validate_values({k: v for k, v in (overrides or {}).items() if v is not None}))
    return doc


def to_augment_config(doc: dict) -> AugmentConfig:
    kwargs = {key: doc[key] for key in AUGMENT_KEYS if key in doc}
    if "grid_divisions" in kwargs:
        kwargs["grid_divisions"] = tuple(kwargs["grid_divisions"])
    return AugmentConfig(**kwargs)
