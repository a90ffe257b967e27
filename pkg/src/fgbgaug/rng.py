"""Pinned deterministic 64-bit random stream.

The generator is SplitMix64: output k of a stream seeded with s is
``mix64((s + (k + 1) * GAMMA) mod 2**64)``. Because the state is just a
counter, any span of the stream can be produced in bulk with vectorized
integer arithmetic, and the sequence is identical whether values are
drawn one at a time or in blocks.

Every derived quantity is pinned here, once, because output files must be
bit-reproducible across runs and worker schedules:

* unit float: ``(u >> 11) * 2**-53`` in [0, 1)
* bounded int below n: ``(u * n) >> 64`` (128-bit multiply-high)
* normal deviate: two consecutive u64 draws (u1, u2);
  ``z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``
* shuffle: Fisher-Yates from the top, one bounded draw per step

None of these may change without invalidating previously recorded runs.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_M64 = (1 << 64) - 1
_INV_2_53 = 2.0**-53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit value."""
    z &= _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class RngStream:
    """One deterministic stream of draws, identified by its 64-bit seed.

    ``seed`` keeps the construction seed so provenance records can name
    the stream; ``_drawn`` counts u64 outputs consumed so far.
    """

    __slots__ = ("seed", "_drawn")

    def __init__(self, seed: int):
        if not 0 <= seed < 1 << 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._drawn = 0

    def next_u64(self) -> int:
        self._drawn += 1
        return mix64(self.seed + self._drawn * GAMMA)

    def bulk_u64(self, n: int) -> np.ndarray:
        """The next ``n`` u64 outputs as a uint64 array; same values as
        ``n`` successive :meth:`next_u64` calls."""
        counters = np.arange(self._drawn + 1, self._drawn + n + 1, dtype=np.uint64)
        self._drawn += n
        return _mix64_vec(np.uint64(self.seed & _M64) + counters * np.uint64(GAMMA))

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * _INV_2_53

    def bulk_random(self, n: int) -> np.ndarray:
        return (self.bulk_u64(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, n: int) -> int:
        """Integer in [0, n) via multiply-high; exactly one u64 consumed."""
        if n < 1:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        return (self.next_u64() * n) >> 64

    def normals(self, n: int, mean: float, sigma: float) -> np.ndarray:
        """``n`` normal deviates, two u64 draws each (see module docstring).

        Always evaluated through the same vectorized expressions so the
        float results are identical no matter how calls are batched.
        """
        u = self.bulk_random(2 * n)
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        return mean + sigma * (radius * np.cos(2.0 * np.pi * u[1::2]))

    def shuffle_indices(self, n: int) -> list[int]:
        """Fisher-Yates permutation of range(n); n - 1 bounded draws."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
