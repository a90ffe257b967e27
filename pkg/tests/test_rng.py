import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgbgaug.rng import GAMMA, RngStream, mix64

_M64 = (1 << 64) - 1


def reference_splitmix64(seed, count):
    """Independent scalar implementation used as the oracle."""
    out = []
    state = seed
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & _M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        out.append(z ^ (z >> 31))
    return out


# first outputs for seed 0, frozen from the reference implementation above
# (they agree with the published splitmix64 vectors)
_SEED0_VECTOR = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
]


def test_known_answer_seed0():
    stream = RngStream(0)
    assert [stream.next_u64() for _ in range(4)] == _SEED0_VECTOR


@pytest.mark.parametrize("seed", [0, 1, 42, 0xDEADBEEF, _M64])
def test_matches_reference(seed):
    stream = RngStream(seed)
    assert [stream.next_u64() for _ in range(32)] == reference_splitmix64(seed, 32)


@settings(max_examples=50)
@given(seed=st.integers(0, _M64), n=st.integers(0, 200))
def test_bulk_equals_scalar(seed, n):
    scalar = RngStream(seed)
    bulk = RngStream(seed)
    expected = [scalar.next_u64() for _ in range(n)]
    assert bulk.bulk_u64(n).tolist() == expected


def test_bulk_resumes_mid_stream():
    a = RngStream(7)
    b = RngStream(7)
    a.bulk_u64(5)
    for _ in range(5):
        b.next_u64()
    assert a.bulk_u64(3).tolist() == [b.next_u64() for _ in range(3)]


def test_seed_out_of_range():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(1 << 64)


def test_random_unit_interval():
    stream = RngStream(11)
    values = [stream.random() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert abs(sum(values) / len(values) - 0.5) < 0.05


def test_random_matches_u64_derivation():
    a, b = RngStream(3), RngStream(3)
    assert a.random() == (b.next_u64() >> 11) * 2.0**-53


def test_uniform_degenerate():
    stream = RngStream(5)
    assert stream.uniform(0.3, 0.3) == 0.3


def test_randbelow_bounds_and_determinism():
    stream = RngStream(8)
    values = [stream.randbelow(10) for _ in range(500)]
    assert all(0 <= v < 10 for v in values)
    assert set(values) == set(range(10))
    again = RngStream(8)
    assert values == [again.randbelow(10) for _ in range(500)]


def test_randbelow_one_is_zero():
    stream = RngStream(9)
    assert all(stream.randbelow(1) == 0 for _ in range(20))


def test_randbelow_rejects_nonpositive():
    with pytest.raises(ValueError):
        RngStream(0).randbelow(0)


def test_normals_consume_two_draws_each():
    a, b = RngStream(21), RngStream(21)
    a.normals(7, 0.0, 1.0)
    b.bulk_u64(14)
    assert a.next_u64() == b.next_u64()


def test_normals_match_pinned_formula():
    a, b = RngStream(22), RngStream(22)
    values = a.normals(50, 0.25, 0.1)
    u = b.bulk_random(100)
    expected = 0.25 + 0.1 * (np.sqrt(-2.0 * np.log1p(-u[0::2])) * np.cos(2.0 * np.pi * u[1::2]))
    assert np.array_equal(values, expected)


def test_normals_statistics():
    values = RngStream(23).normals(200_000, 1.0, 2.0)
    assert abs(values.mean() - 1.0) < 2.0 * 4 / math.sqrt(200_000)
    assert abs(values.std() - 2.0) < 0.05


def test_normals_sigma_zero_is_constant():
    values = RngStream(24).normals(100, 0.5, 0.0)
    assert np.all(values == 0.5)


@settings(max_examples=40)
@given(seed=st.integers(0, _M64), n=st.integers(1, 64))
def test_shuffle_is_permutation(seed, n):
    perm = RngStream(seed).shuffle_indices(n)
    assert sorted(perm) == list(range(n))


def test_shuffle_trivial_and_deterministic():
    assert RngStream(0).shuffle_indices(1) == [0]
    assert RngStream(77).shuffle_indices(16) == RngStream(77).shuffle_indices(16)


def test_mix64_masks_input():
    assert mix64((123 + GAMMA) & _M64) == mix64(123 + GAMMA)
