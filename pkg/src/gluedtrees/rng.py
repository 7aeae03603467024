"""Counter-based random streams.

Every draw is a pure function of ``(seed, index)``: the value at site ``j`` of
stream ``seed`` is the SplitMix64 output at counter position ``j``.  No state is
carried between calls, so a disorder realization does not depend on the order
(or the chunking) in which its sites are generated.
"""

from __future__ import annotations

import struct

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (result in [0, 2**64))."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))


def stream_key(seed: int) -> int:
    return mix64(int(seed) & MASK64)


def _key_bits(key) -> int:
    if isinstance(key, float):
        return struct.unpack("<Q", struct.pack("<d", key))[0]
    if isinstance(key, str):
        h = 0
        for b in key.encode():
            h = mix64(h ^ b)
        return h
    return int(key) & MASK64


def child_seed(master: int, *keys) -> int:
    """Derive an independent 64-bit seed from ``master`` and a tuple of keys.

    Keys may be ints, floats (hashed by their IEEE bits) or strings.  Adding a
    new key (e.g. another repetition index) never changes seeds derived from
    other key tuples.
    """
    s = stream_key(master)
    for k in keys:
        s = mix64(s ^ mix64(_key_bits(k) + GOLDEN))
    return s


def random_bits(seed: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit outputs for counter positions ``start .. start+count-1``."""
    key = np.uint64(stream_key(seed))
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = key + idx * np.uint64(GOLDEN)
    return _mix64_array(z)


def uniform_open(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform doubles on the open interval (0, 1).

    Uses the top 52 bits so that ``bits + 0.5`` stays exactly representable and
    the endpoints are never produced (inverse-CDF transforms stay finite).
    """
    bits = random_bits(seed, start, count) >> np.uint64(12)
    return (bits.astype(np.float64) + 0.5) * 2.0**-52
