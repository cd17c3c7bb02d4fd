"""Counter-based random streams with a fixed normal transform.

Every stochastic routine in the package draws from an :class:`RngStream`,
keyed by ``(seed, index)``. Streams with distinct keys are independent by
construction of the Philox counter-based generator, so per-trial child
streams give results that do not depend on scheduling or thread count.

Normal transform (fixed permanently): take 64 raw Philox bits, keep the top
53, form the uniform u = (bits + 0.5) * 2**-53 in (0, 1), and apply the
inverse normal CDF (scipy.special.ndtri). One raw draw per normal variate.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    # SplitMix64 finalizer; mixes child indices so sibling streams decorrelate.
    x = (x + _GOLDEN64) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


class RngStream:
    """Deterministic Gaussian/uniform source identified by (seed, stream_index)."""

    def __init__(self, seed: int, stream_index: int = 0):
        if seed < 0 or stream_index < 0:
            raise ValueError("seed and stream_index must be nonnegative")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        # Philox accepts a 128-bit key; (stream_index, seed) packs into it directly.
        key = ((self.stream_index & _MASK64) << 64) | (self.seed & _MASK64)
        self._bitgen = np.random.Philox(key=key)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_index={self.stream_index})"

    def child(self, k: int) -> "RngStream":
        """Derived stream for trial k; stable under any execution order."""
        mixed = _splitmix64((self.stream_index * 0x100000001B3 + k + 1) & _MASK64)
        return RngStream(self.seed, mixed)

    def _raw(self, n: int) -> np.ndarray:
        return self._bitgen.random_raw(n)

    def uniforms(self, shape) -> np.ndarray:
        """Uniform draws in the open interval (0, 1)."""
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        bits = self._raw(n) >> np.uint64(11)
        u = (bits.astype(np.float64) + 0.5) * 2.0**-53
        return u.reshape(shape)

    def normals(self, shape) -> np.ndarray:
        """Standard normal draws via the documented inverse-CDF transform."""
        return ndtri(self.uniforms(shape))


def seed_stream(seed: int, index: int = 0) -> RngStream:
    """Construct the stream keyed by (seed, index)."""
    return RngStream(seed, index)
