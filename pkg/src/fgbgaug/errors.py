"""Exception types shared by the codecs and the augmentation pipeline."""


class ImageIOError(ValueError):
    """Base for problems decoding or encoding an image file."""


class UnsupportedImageError(ImageIOError):
    """File is recognizable but uses a layout this package does not handle
    (wrong magic, bit depth, color type, interlacing, maxval, ...)."""


class CorruptImageError(ImageIOError):
    """File is damaged: truncated stream, bad checksum, or inconsistent sizes."""


class DimensionMismatchError(ValueError):
    """An image and its mask do not have identical dimensions."""
