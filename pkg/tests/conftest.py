import numpy as np
import pytest

from fgbgaug import BinaryMask, Image, save_image, save_mask


def random_image(height, width, seed=0):
    g = np.random.default_rng(seed)
    return Image(g.integers(0, 256, (height, width, 3), dtype=np.uint8))


def random_mask(height, width, seed=0, density=0.5):
    g = np.random.default_rng(seed + 7919)
    return BinaryMask(g.random((height, width)) < density)


def build_dataset(root, count, size=(20, 24), seed=0, image_suffix=".png", mask_suffix=".png"):
    """Write `count` image/mask pairs under root/images and root/masks."""
    height, width = size
    image_dir = root / "images"
    mask_dir = root / "masks"
    image_dir.mkdir(parents=True, exist_ok=True)
    mask_dir.mkdir(parents=True, exist_ok=True)
    rels = []
    for i in range(count):
        rel = f"img{i:03d}{image_suffix}"
        save_image(random_image(height, width, seed=seed + i), image_dir / rel)
        save_mask(random_mask(height, width, seed=seed + i), (mask_dir / rel).with_suffix(mask_suffix))
        rels.append(rel)
    return image_dir, mask_dir, rels


def tree_digest(root):
    """Stable digest of every file under root, for byte-identity checks."""
    import hashlib

    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(path.relative_to(root).as_posix().encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


@pytest.fixture
def make_image():
    return random_image


@pytest.fixture
def make_mask():
    return random_mask
