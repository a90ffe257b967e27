import numpy as np
import pytest

import fgbgaug_bindings as fb


def _image(h, w, seed=0):
    return np.random.default_rng(seed).integers(0, 256, (h, w, 3), dtype=np.uint8)


def _mask(h, w, seed=0):
    return np.random.default_rng(seed + 1).random((h, w)) < 0.5


def test_rho_zero_returns_input_unchanged():
    img, mask = _image(12, 12), _mask(12, 12)
    out, record = fb.augment(img, mask, {"rho": 0.0}, seed=5)
    assert np.array_equal(out, img)
    assert record["applied"] is False
    assert record["noise_rects"] == [] and record["permutation"] is None


def test_same_seed_same_output():
    img, mask = _image(20, 16, 2), _mask(20, 16, 2)
    cfg = {"rho": 1.0, "noise_sigma": 0.2}
    out1, rec1 = fb.augment(img, mask, cfg, seed=99)
    out2, rec2 = fb.augment(img, mask, cfg, seed=99)
    assert np.array_equal(out1, out2)
    assert rec1 == rec2


def test_different_seeds_differ():
    img, mask = _image(20, 16, 3), _mask(20, 16, 3)
    out1, _ = fb.augment(img, mask, {"rho": 1.0}, seed=1)
    out2, _ = fb.augment(img, mask, {"rho": 1.0}, seed=2)
    assert not np.array_equal(out1, out2)


def test_input_array_never_mutated():
    img, mask = _image(16, 16, 4), _mask(16, 16, 4)
    snapshot = img.copy()
    fb.augment(img, mask, {"rho": 1.0}, seed=3)
    assert np.array_equal(img, snapshot)


def test_shape_mismatch_raises():
    with pytest.raises(ValueError, match=r"8x8.*4x4"):
        fb.augment(_image(8, 8), _mask(4, 4))


def test_bad_config_key_raises():
    with pytest.raises(ValueError, match="not_a_key"):
        fb.augment(_image(8, 8), _mask(8, 8), {"not_a_key": 1})


def test_bad_image_dtype_raises():
    img = _image(8, 8).astype(np.float32)
    with pytest.raises(ValueError, match="uint8"):
        fb.augment(img, _mask(8, 8))


def test_bad_mask_dtype_raises():
    with pytest.raises(ValueError, match="boolean"):
        fb.augment(_image(8, 8), np.zeros((8, 8), np.uint8))


def test_theta_key_accepted():
    img, mask = _image(8, 8), _mask(8, 8)
    out, _ = fb.augment(img, mask, {"rho": 0.0, "theta": 0.3}, seed=1)
    assert np.array_equal(out, img)


def test_record_matches_manifest_schema():
    _, record = fb.augment(_image(16, 16, 5), _mask(16, 16, 5), {"rho": 1.0}, seed=7)
    assert set(record) == {
        "gate_value",
        "applied",
        "sampled_area",
        "noise_rects",
        "grid_division",
        "permutation",
        "stream_seed",
    }
    assert record["stream_seed"] == "7"


def test_threshold_mask_rule():
    sal = np.array([[0.2, 0.5], [0.7, 0.0]])
    bits = fb.threshold_mask(sal, 0.5)
    assert bits.tolist() == [[False, True], [True, False]]


def test_threshold_mask_matches_core():
    from fgbgaug import SaliencyMap
    from fgbgaug import threshold_mask as core_threshold

    sal = np.random.default_rng(0).random((10, 10))
    assert np.array_equal(
        fb.threshold_mask(sal, 0.4), core_threshold(SaliencyMap(sal), 0.4).bits
    )


def test_threshold_mask_rejects_bad_shape():
    with pytest.raises(ValueError):
        fb.threshold_mask(np.zeros((2, 2, 2)))
