"""Counter-based random streams (Philox4x32-10), vectorised with numpy.

A draw is a pure function of ``(seed, walk index, step, slot)``, so every walk
owns an independent stream and results do not depend on how walks are batched
or scheduled.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

_M32 = np.uint64(0xFFFFFFFF)
_MUL0 = np.uint64(0xD2511F53)
_MUL1 = np.uint64(0xCD9E8D57)
_WEYL0 = np.uint64(0x9E3779B9)
_WEYL1 = np.uint64(0xBB67AE85)
_S32 = np.uint64(32)


def philox4x32(counter, key, rounds: int = 10):
    """Philox4x32 block function.

    ``counter`` is a sequence of four uint32-valued arrays, ``key`` of two.
    Returns four uint64 arrays holding 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _M32 for c in counter)
    k0, k1 = (np.asarray(k, dtype=np.uint64) & _M32 for k in key)
    for i in range(rounds):
        if i:
            k0 = (k0 + _WEYL0) & _M32
            k1 = (k1 + _WEYL1) & _M32
        p0 = _MUL0 * c0
        p1 = _MUL1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _S32) ^ c1 ^ k0,
            p1 & _M32,
            (p0 >> _S32) ^ c3 ^ k1,
            p0 & _M32,
        )
    return c0, c1, c2, c3


class CounterRNG:
    """Stateless uniform and normal draws keyed by a 64-bit seed."""

    def __init__(self, seed: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self._key = (np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32))

    def uniforms(self, walk_ids, step: int, n: int) -> np.ndarray:
        """Array of shape ``(len(walk_ids), n)`` with values in the open interval (0, 1)."""
        ids = np.asarray(walk_ids, dtype=np.uint64)
        if not 0 <= step < 2**32:
            raise ValueError(f"step index out of range: {step}")
        step = np.uint64(step)
        nblocks = (n + 1) // 2
        out = np.empty((len(ids), 2 * nblocks))
        lo_id, hi_id = ids & _M32, ids >> _S32
        for j in range(nblocks):
            w = philox4x32(
                (np.full_like(ids, step), np.full_like(ids, j), lo_id, hi_id),
                self._key,
            )
            # 53-bit mantissas from two words each, shifted off zero
            a = ((w[0] >> np.uint64(5)) << np.uint64(26)) | (w[1] >> np.uint64(6))
            b = ((w[2] >> np.uint64(5)) << np.uint64(26)) | (w[3] >> np.uint64(6))
            out[:, 2 * j] = (a.astype(float) + 0.5) * 2.0**-53
            out[:, 2 * j + 1] = (b.astype(float) + 0.5) * 2.0**-53
        return out[:, :n]

    def directions(self, walk_ids, step: int, d: int, extra: int = 0):
        """Uniform unit vectors in R^d plus ``extra`` independent uniforms per walk."""
        m = (d + 1) // 2
        u = self.uniforms(walk_ids, step, 2 * m + extra)
        rad = np.sqrt(-2.0 * np.log(u[:, :m]))
        ang = 2.0 * np.pi * u[:, m : 2 * m]
        g = np.concatenate([rad * np.cos(ang), rad * np.sin(ang)], axis=1)[:, :d]
        return g / np.linalg.norm(g, axis=1, keepdims=True), u[:, 2 * m :]
