"""Image, saliency-map, and binary-mask values plus their file codecs.

Pixel storage is 8-bit; arithmetic on pixels happens on the normalized
[0, 1] view. Images and masks are never resized here: a pair must already
agree in size, which :func:`validate_pair` enforces.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import png
from .errors import CorruptImageError, DimensionMismatchError, UnsupportedImageError


@dataclass(eq=False)
class Image:
    """8-bit RGB raster; ``pixels`` has shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixel array, got shape {self.pixels.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got shape {self.pixels.shape}")
        self.pixels = arr

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def normalized(self) -> np.ndarray:
        """Float view of the pixels in [0, 1] (raw / 255)."""
        return self.pixels.astype(np.float64) / 255.0

    def copy(self) -> "Image":
        return Image(self.pixels.copy())


@dataclass(eq=False)
class SaliencyMap:
    """Per-pixel foreground probability in [0, 1]; ``values`` has shape (h, w)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected (h, w) saliency array, got shape {self.values.shape}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("saliency values must lie in [0, 1]")
        self.values = arr

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(eq=False)
class BinaryMask:
    """Boolean raster, True = foreground; ``bits`` has shape (h, w)."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.bits)
        if arr.dtype != np.bool_:
            raise ValueError(f"mask bits must be boolean, got dtype {arr.dtype}")
        if arr.ndim != 2:
            raise ValueError(f"expected (h, w) mask array, got shape {self.bits.shape}")
        self.bits = arr

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


def load_image(path: str | Path) -> Image:
    """Load an RGB image from an 8-bit PNG (RGB or RGBA, alpha dropped) or a P6 PPM."""
    data = Path(path).read_bytes()
    if data[: len(png.SIGNATURE)] == png.SIGNATURE:
        arr = png.decode(data)
        if arr.shape[2] == 4:
            arr = np.ascontiguousarray(arr[:, :, :3])
        elif arr.shape[2] != 3:
            raise UnsupportedImageError(f"{path}: grayscale PNG is not an RGB image")
        return Image(arr)
    if data[:2] == b"P6":
        return Image(_decode_pnm(data, b"P6", 3))
    raise UnsupportedImageError(f"{path}: not a PNG or binary PPM (P6) file")


def save_image(img: Image, path: str | Path) -> None:
    """Write ``img`` as PNG or P6 PPM depending on the file suffix.

    The round trip through :func:`load_image` reproduces the pixel bytes exactly.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        payload = png.encode(img.pixels)
    elif suffix == ".ppm":
        payload = _encode_pnm(img.pixels, b"P6")
    else:
        raise UnsupportedImageError(f"{path}: cannot infer output format from suffix")
    path.write_bytes(payload)


def load_saliency(path: str | Path) -> SaliencyMap:
    """Load a saliency map from an 8-bit grayscale PNG or a P5 PGM (sample / 255)."""
    data = Path(path).read_bytes()
    if data[: len(png.SIGNATURE)] == png.SIGNATURE:
        arr = png.decode(data)
        if arr.shape[2] != 1:
            raise UnsupportedImageError(f"{path}: saliency PNG must be grayscale")
        gray = arr[:, :, 0]
    elif data[:2] == b"P5":
        gray = _decode_pnm(data, b"P5", 1)[:, :, 0]
    else:
        raise UnsupportedImageError(f"{path}: not a grayscale PNG or binary PGM (P5) file")
    return SaliencyMap(gray.astype(np.float64) / 255.0)


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    """Write a binary mask as 8-bit grayscale (0/255) PNG or P5 PGM by suffix."""
    path = Path(path)
    gray = np.where(mask.bits, np.uint8(255), np.uint8(0))
    suffix = path.suffix.lower()
    if suffix == ".png":
        payload = png.encode(gray)
    elif suffix == ".pgm":
        payload = _encode_pnm(gray[:, :, np.newaxis], b"P5")
    else:
        raise UnsupportedImageError(f"{path}: cannot infer output format from suffix")
    path.write_bytes(payload)


def threshold_mask(smap: SaliencyMap, theta: float) -> BinaryMask:
    """Binarize a saliency map: foreground where value >= theta.

    The comparison is inclusive, so a value exactly equal to theta counts
    as foreground; theta 0 yields all-ones and theta > 1 all-zeros.
    """
    return BinaryMask(smap.values >= theta)


def validate_pair(img: Image, mask: BinaryMask) -> None:
    """Raise unless image and mask dimensions match exactly."""
    if (img.height, img.width) != (mask.height, mask.width):
        raise DimensionMismatchError(
            f"image is {img.width}x{img.height} but mask is {mask.width}x{mask.height}"
        )


def _decode_pnm(data: bytes, magic: bytes, nchan: int) -> np.ndarray:
    width, height, maxval, offset = _parse_pnm_header(data, magic)
    if maxval != 255:
        raise UnsupportedImageError(f"unsupported {magic.decode()} maxval {maxval} (only 255)")
    need = width * height * nchan
    body = data[offset : offset + need]
    if len(body) < need:
        raise CorruptImageError(
            f"truncated {magic.decode()}: {len(body)} pixel bytes, expected {need}"
        )
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, nchan).copy()


def _encode_pnm(pixels: np.ndarray, magic: bytes) -> bytes:
    height, width = pixels.shape[:2]
    header = b"%s\n%d %d\n255\n" % (magic, width, height)
    return header + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def _parse_pnm_header(data: bytes, magic: bytes) -> tuple[int, int, int, int]:
    if data[:2] != magic:
        raise UnsupportedImageError(f"not a {magic.decode()} stream")
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        # skip whitespace and '#' comments between header fields
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos] == ord("#"):
            while pos < len(data) and data[pos] != ord("\n"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CorruptImageError(f"malformed {magic.decode()} header")
        fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise CorruptImageError(f"malformed {magic.decode()} header")
    pos += 1  # single whitespace byte separates header from pixel data
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise CorruptImageError(f"bad {magic.decode()} dimensions {width}x{height}")
    return width, height, maxval, pos
