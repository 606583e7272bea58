"""Stable, named random streams.

All stochastic behaviour in the toolkit flows from one user seed through
independently keyed streams, so changing one consumer (batch size, number of
variations, ...) never reshuffles another's history.
"""

from __future__ import annotations

import hashlib
import random

MASK64 = (1 << 64) - 1


def stable_u64(*parts: str | int | bytes) -> int:
    """Hash the parts to an unsigned 64-bit integer, stably across runs.

    Encoding: each part becomes bytes (UTF-8 for str, decimal ASCII for int,
    raw for bytes), is prefixed with its length as 4 big-endian bytes, and the
    concatenation is digested with BLAKE2b-64. The digest is read big-endian.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, bytes):
            raw = part
        elif isinstance(part, str):
            raw = part.encode("utf-8")
        elif isinstance(part, int):
            raw = str(part).encode("ascii")
        else:
            raise TypeError(f"unhashable stream part: {type(part)!r}")
        h.update(len(raw).to_bytes(4, "big"))
        h.update(raw)
    return int.from_bytes(h.digest(), "big")


def stream(*parts: str | int | bytes) -> random.Random:
    """A dedicated PRNG for the named stream."""
    return random.Random(stable_u64(*parts))
