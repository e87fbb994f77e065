"""Threefry-2x32 (20 rounds) counter-based generator, vectorized over numpy arrays.

A uniform draw is a pure function of ``(key, counter)``, so every trajectory
can own an independent stream addressed by its index. Matches the Random123
known-answer vectors.
"""

import numpy as np

_ROTATIONS = (13, 15, 26, 6, 17, 29, 16, 24)
_PARITY = np.uint32(0x1BD11BDA)


def _rotl(x, r):
    return (x << np.uint32(r)) | (x >> np.uint32(32 - r))


def threefry2x32(key, x0, x1):
    """Encrypt counter words ``(x0, x1)`` under the two-word ``key``.

    ``x0`` and ``x1`` are broadcast uint32 arrays; returns two uint32 arrays.
    """
    k0, k1 = np.uint32(key[0]), np.uint32(key[1])
    ks = (k0, k1, k0 ^ k1 ^ _PARITY)
    with np.errstate(over="ignore"):  # arithmetic is mod 2^32 by design
        x0 = np.asarray(x0, dtype=np.uint32) + ks[0]
        x1 = np.asarray(x1, dtype=np.uint32) + ks[1]
        for block in range(5):
            for r in _ROTATIONS[(block % 2) * 4:(block % 2) * 4 + 4]:
                x0 = x0 + x1
                x1 = _rotl(x1, r) ^ x0
            inj = block + 1
            x0 = x0 + ks[inj % 3]
            x1 = x1 + ks[(inj + 1) % 3] + np.uint32(inj)
    return x0, x1


def seed_to_key(seed: int) -> tuple[int, int]:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed & 0xFFFFFFFF, seed >> 32


def uniform(key, x0, x1) -> np.ndarray:
    """Doubles in (0, 1] with 53 random bits, one per counter."""
    hi, lo = threefry2x32(key, x0, x1)
    bits = (hi.astype(np.uint64) << np.uint64(21)) | (lo.astype(np.uint64) >> np.uint64(11))
    return (bits.astype(np.float64) + 1.0) * 2.0**-53
