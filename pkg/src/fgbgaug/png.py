"""Minimal PNG codec for 8-bit grayscale, RGB, and RGBA rasters.

Decoding handles non-interlaced color types 0 (grayscale), 2 (RGB) and
6 (RGBA) at bit depth 8, with full CRC verification and all five scanline
filters. Encoding always writes filter-type-0 scanlines at a fixed zlib
level so that identical pixels produce identical files.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import CorruptImageError, UnsupportedImageError

SIGNATURE = b"\x89PNG\r\n\x1a\n"

# Pinned: changing the compression level changes output bytes.
_ZLIB_LEVEL = 6

_CHANNELS_BY_COLOR_TYPE = {0: 1, 2: 3, 6: 4}
_COLOR_TYPE_BY_CHANNELS = {1: 0, 3: 2}


def decode(data: bytes) -> np.ndarray:
    """Decode a PNG byte string into a (height, width, channels) uint8 array.

    channels is 1, 3, or 4 depending on the file's color type.
    """
    if len(data) < len(SIGNATURE) or data[: len(SIGNATURE)] != SIGNATURE:
        raise UnsupportedImageError("not a PNG stream (bad signature)")

    header: tuple[int, int, int] | None = None
    idat = bytearray()
    saw_iend = False
    pos = len(SIGNATURE)
    while pos < len(data):
        if pos + 8 > len(data):
            raise CorruptImageError("truncated PNG: incomplete chunk header")
        length = struct.unpack(">I", data[pos : pos + 4])[0]
        ctype = data[pos + 4 : pos + 8]
        end = pos + 8 + length
        if end + 4 > len(data):
            raise CorruptImageError(f"truncated PNG: chunk {ctype!r} cut short")
        payload = data[pos + 8 : end]
        (crc,) = struct.unpack(">I", data[end : end + 4])
        if zlib.crc32(ctype + payload) & 0xFFFFFFFF != crc:
            raise CorruptImageError(f"bad CRC in chunk {ctype!r}")
        if ctype == b"IHDR":
            header = _parse_ihdr(payload)
        elif ctype == b"IDAT":
            if header is None:
                raise CorruptImageError("IDAT before IHDR")
            idat.extend(payload)
        elif ctype == b"IEND":
            saw_iend = True
            break
        # ancillary chunks are skipped
        pos = end + 4

    if header is None:
        raise CorruptImageError("missing IHDR chunk")
    if not saw_iend:
        raise CorruptImageError("truncated PNG: missing IEND")
    if not idat:
        raise CorruptImageError("missing IDAT data")

    width, height, nchan = header
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise CorruptImageError(f"bad IDAT zlib stream: {exc}") from exc
    stride = width * nchan
    if len(raw) != height * (stride + 1):
        raise CorruptImageError(
            f"scanline data is {len(raw)} bytes, expected {height * (stride + 1)}"
        )
    return _unfilter(raw, height, width, nchan)


def encode(pixels: np.ndarray) -> bytes:
    """Encode a (h, w) or (h, w, 1|3) uint8 array as a grayscale or RGB PNG."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3 or arr.shape[2] not in _COLOR_TYPE_BY_CHANNELS:
        raise ValueError(f"cannot encode array of shape {pixels.shape}")
    height, width, nchan = arr.shape
    color_type = _COLOR_TYPE_BY_CHANNELS[nchan]

    # One filter-type byte (0 = None) prepended to each raw scanline.
    scanlines = np.zeros((height, 1 + width * nchan), dtype=np.uint8)
    scanlines[:, 1:] = arr.reshape(height, width * nchan)
    compressed = zlib.compress(scanlines.tobytes(), _ZLIB_LEVEL)

    ihdr = struct.pack(">IIBBBBB", width, height, 8, color_type, 0, 0, 0)
    return b"".join(
        [SIGNATURE, _chunk(b"IHDR", ihdr), _chunk(b"IDAT", compressed), _chunk(b"IEND", b"")]
    )


def _parse_ihdr(payload: bytes) -> tuple[int, int, int]:
    if len(payload) != 13:
        raise CorruptImageError(f"IHDR is {len(payload)} bytes, expected 13")
    width, height, depth, color, compression, filt, interlace = struct.unpack(
        ">IIBBBBB", payload
    )
    if width < 1 or height < 1:
        raise CorruptImageError(f"bad dimensions {width}x{height}")
    if depth != 8:
        raise UnsupportedImageError(f"unsupported bit depth {depth} (only 8)")
    if color not in _CHANNELS_BY_COLOR_TYPE:
        raise UnsupportedImageError(f"unsupported color type {color} (only 0, 2, 6)")
    if compression != 0 or filt != 0:
        raise UnsupportedImageError("unsupported compression/filter method")
    if interlace != 0:
        raise UnsupportedImageError("interlaced PNGs are not supported")
    return width, height, _CHANNELS_BY_COLOR_TYPE[color]


def _unfilter(raw: bytes, height: int, width: int, nchan: int) -> np.ndarray:
    stride = width * nchan
    out = np.empty((height, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.uint8)
    pos = 0
    for y in range(height):
        ftype = raw[pos]
        pos += 1
        row = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=pos)
        pos += stride
        if ftype == 0:
            recon = row.copy()
        elif ftype == 1:  # Sub: per-lane running sum
            recon = (
                np.cumsum(row.reshape(width, nchan).astype(np.int64), axis=0) % 256
            ).astype(np.uint8).reshape(stride)
        elif ftype == 2:  # Up
            recon = row + prev  # uint8 wraps mod 256
        elif ftype == 3:
            recon = _unfilter_average(row.tobytes(), prev.tobytes(), nchan)
        elif ftype == 4:
            recon = _unfilter_paeth(row.tobytes(), prev.tobytes(), nchan)
        else:
            raise CorruptImageError(f"bad scanline filter type {ftype}")
        out[y] = recon
        prev = out[y]
    return out.reshape(height, width, nchan)


def _unfilter_average(row: bytes, prev: bytes, bpp: int) -> np.ndarray:
    recon = bytearray(len(row))
    for i in range(len(row)):
        left = recon[i - bpp] if i >= bpp else 0
        recon[i] = (row[i] + ((left + prev[i]) >> 1)) & 0xFF
    return np.frombuffer(bytes(recon), dtype=np.uint8)


def _unfilter_paeth(row: bytes, prev: bytes, bpp: int) -> np.ndarray:
    recon = bytearray(len(row))
    for i in range(len(row)):
        a = recon[i - bpp] if i >= bpp else 0
        b = prev[i]
        c = prev[i - bpp] if i >= bpp else 0
        p = a + b - c
        pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
        if pa <= pb and pa <= pc:
            pred = a
        elif pb <= pc:
            pred = b
        else:
            pred = c
        recon[i] = (row[i] + pred) & 0xFF
    return np.frombuffer(bytes(recon), dtype=np.uint8)


def _chunk(ctype: bytes, payload: bytes) -> bytes:
    return b"".join(
        [
            struct.pack(">I", len(payload)),
            ctype,
            payload,
            struct.pack(">I", zlib.crc32(ctype + payload) & 0xFFFFFFFF),
        ]
    )
