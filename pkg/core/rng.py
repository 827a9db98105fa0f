"""Seeded random streams.

Every subsystem draws from its own generator derived from the run seed and a
stable tag, so adding draws in one subsystem never shifts another.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["derive_rng"]


def derive_rng(seed: int, tag: str) -> np.random.Generator:
    """Independent generator for one subsystem of a seeded run.

    The tag is mixed in through CRC32, never the per-process randomized ``hash()``.
    """
    crc = zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, crc]))
