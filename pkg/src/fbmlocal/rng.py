"""Seeding and Gaussian draws.

Streams come from numpy's Philox4x64 counter-based generator keyed by a
64-bit seed.  Replica ``r`` of a run with master seed ``M`` is keyed by
``derive_seed(M, r)``, the SplitMix64 finalizer applied to
``splitmix64(M) + r`` (mod 2**64).  Normal variates are produced by
inverting the normal CDF (``scipy.special.ndtri``, Cephes rational
approximations) at uniforms built from the top 53 bits of each raw draw, so
the number of raw draws per variate is exactly one.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

SEED_DERIVATION = "splitmix64(splitmix64(master) + replica)"
GENERATOR_NAME = "Philox4x64-10 / inverse-CDF normals (ndtri)"

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 output function (Steele, Lea & Flood)."""
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, replica: int) -> int:
    """64-bit stream key for replica ``replica`` of ``master_seed``."""
    return splitmix64((splitmix64(int(master_seed) & _MASK64) + int(replica)) & _MASK64)


def derive_seeds(master_seed: int, count: int, offset: int = 0) -> list[int]:
    return [derive_seed(master_seed, offset + r) for r in range(count)]


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def uniforms(seed: int, size: int) -> np.ndarray:
    """``size`` uniforms in the open interval (0, 1) from the stream ``seed``."""
    bitgen = np.random.Philox(key=check_seed(seed))
    raw = bitgen.random_raw(size)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed: int, size: int) -> np.ndarray:
    """``size`` standard normal variates from the stream ``seed``."""
    return ndtri(uniforms(seed, size))


def generator(seed: int) -> np.random.Generator:
    """A Philox-backed numpy Generator for auxiliary sampling (permutations, scans)."""
    return np.random.Generator(np.random.Philox(key=check_seed(seed)))
