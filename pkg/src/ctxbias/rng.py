"""Deterministic counter-based random fields.

Every noise value used by the synthetic scorer bank is a pure function of
(seed, stream tag, entity index). Drawing a value for one entity never
advances shared generator state, which is what makes group scoring
independent of group composition and keeps outputs bit-reproducible when
the same entities are scored in a different order or subset.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = np.float64(1.0 / (1 << 53))


def _mix(x: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """splitmix64 finalizer; uint64 arithmetic wraps by design."""
    x = (x + _GOLDEN).astype(np.uint64) if isinstance(x, np.ndarray) else np.uint64(x + _GOLDEN)
    x = x ^ (x >> np.uint64(30))
    x = x * _MIX1
    x = x ^ (x >> np.uint64(27))
    x = x * _MIX2
    x = x ^ (x >> np.uint64(31))
    return x


def _part_to_u64(part: int | str) -> np.uint64:
    if isinstance(part, str):
        digest = hashlib.blake2s(part.encode("utf-8"), digest_size=8).digest()
        return np.uint64(int.from_bytes(digest, "little"))
    # negative seeds allowed; reinterpret as two's complement
    return np.uint64(np.int64(part).view(np.uint64))


def stream_key(*parts: int | str) -> np.uint64:
    """Fold seed/tag/id parts into a single 64-bit stream key."""
    acc = np.uint64(0x6A09E667F3BCC908)
    with np.errstate(over="ignore"):
        for part in parts:
            acc = _mix(acc ^ _part_to_u64(part))
    return acc


def uniform_field(key: np.uint64, index: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) values addressed by integer index under a stream key."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix(idx * _GOLDEN ^ key)
    return ((h >> np.uint64(11)).astype(np.float64)) * _U53


def normal_field(key: np.uint64, index: np.ndarray) -> np.ndarray:
    """Standard normal values addressed by integer index (Box-Muller)."""
    with np.errstate(over="ignore"):
        k1 = _mix(key ^ np.uint64(0x9E3779B97F4A7C15))
        k2 = _mix(key ^ np.uint64(0xC2B2AE3D27D4EB4F))
    u1 = uniform_field(k1, index)
    u2 = uniform_field(k2, index)
    # 1 - u1 lies in (0, 1], so the log is finite
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def grid_index(n_rows: int, n_cols: int) -> np.ndarray:
    """Row-major (u, m) index grid usable with the field functions."""
    rows = np.arange(n_rows, dtype=np.uint64)[:, None]
    cols = np.arange(n_cols, dtype=np.uint64)[None, :]
    return rows * np.uint64(1 << 32) + cols
