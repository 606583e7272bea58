"""Model-free stub generator: deterministic seeded noise images.

Lets the full system run without a GPU or checkpoint downloads. The same
(seed, width, height) always yields byte-identical PNG output.
"""

from __future__ import annotations

import random
import struct
import zlib


def _png(width: int, height: int, rgb: bytes) -> bytes:
    def chunk(tag: bytes, payload: bytes) -> bytes:
        crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
        return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)

    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    stride = width * 3
    raw = b"".join(b"\x00" + rgb[y * stride : (y + 1) * stride] for y in range(height))
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 6))
        + chunk(b"IEND", b"")
    )


def noise_image(seed: int, width: int, height: int) -> bytes:
    """Seeded pseudo-random RGB noise as a PNG."""
    rng = random.Random(f"{seed}:{width}:{height}")
    return _png(width, height, rng.randbytes(width * height * 3))
