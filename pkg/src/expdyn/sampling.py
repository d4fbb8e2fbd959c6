# -*- coding: utf-8 -*-
"""
Seeded random streams.

Each sample draws from its own generator keyed by (seed, stream, index), so a
sample's value never depends on how work is chunked or how many workers run.
"""
import math
from typing import Optional

import numpy as np

# stream ids
STREAM_CONSTANTS = 1_000_000
STREAM_PROOF = 2_000_000


def sample_generator(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent PCG64 generator for one sample."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream, index))))


def uniform_in_disk(rng: np.random.Generator, center: complex, radius: float) -> complex:
    """Area-uniform point of B(center, radius)."""
    u, t = rng.random(2)
    return center + complex(radius * math.sqrt(u) * math.cos(math.tau * t),
                            radius * math.sqrt(u) * math.sin(math.tau * t))


def uniform_in_annulus(rng: np.random.Generator, center: complex, inner: float, outer: float,
                       sector: Optional[int] = None, sectors: int = 1) -> complex:
    """
    Area-uniform point of the annulus inner <= |w - center| < outer.

    With `sector` given, the angle is restricted to
    [2 pi sector / sectors, 2 pi (sector + 1) / sectors).
    """
    u, t = rng.random(2)
    r = math.sqrt(inner * inner + u * (outer * outer - inner * inner))
    if sector is None:
        theta = math.tau * t
    else:
        theta = math.tau * (sector + t) / sectors
    return center + complex(r * math.cos(theta), r * math.sin(theta))


def disk_points(seed: int, stream: int, count: int, center: complex, radius: float) -> np.ndarray:
    """`count` points of B(center, radius), one generator per index."""
    return np.array(
        [uniform_in_disk(sample_generator(seed, stream, i), center, radius) for i in range(count)],
        dtype=complex,
    )
