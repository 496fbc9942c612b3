"""Deterministic keyed randomness.

Every random draw in the corpus tools and the simulator is a pure function
of its key (typically seed, domain tag, and example id).  This makes labels
and predictions independent of iteration order, stable under inserting or
removing other examples, and byte-reproducible across platforms and Python
versions (unlike ``hash()``, which is salted per process).
"""

from __future__ import annotations

import hashlib

_UNIT_SCALE = 1.0 / (1 << 53)
_SEP = b"\x1f"


def keyed_u64(*parts: object) -> int:
    """64-bit digest of the key parts, as an unsigned integer."""
    data = _SEP.join(str(p).encode("utf-8") for p in parts)
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def keyed_unit(*parts: object) -> float:
    """Uniform float in [0, 1) keyed by the parts."""
    return (keyed_u64(*parts) >> 11) * _UNIT_SCALE


def keyed_int(n: int, *parts: object) -> int:
    """Uniform integer in [0, n) keyed by the parts.

    Modulo bias is ~n / 2**64 and irrelevant at the class counts used here.
    """
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    return keyed_u64(*parts) % n
