"""Seed discipline: counter-based, platform-stable random number streams.

Every stochastic quantity in the package (random couplings, random states,
ensemble realizations) is drawn from a Philox generator keyed by a tuple of
integers through ``numpy.random.SeedSequence``.  Philox is counter based and
SeedSequence hashing is documented stable, so coupling tables and random
state draws are bit-reproducible across platforms.  Realization r of a sweep
derives its key from (master_seed, structural point key, r); the coupling
strength and temperature axes are deliberately excluded from the key so that
sweeps along those axes share random states (common random numbers).
"""

from __future__ import annotations

import hashlib

import numpy as np


def _as_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & (2**64 - 1)
    if isinstance(key, str):
        return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "big")
    raise TypeError(f"seed key must be int or str, got {type(key).__name__}")


def spawn_rng(*keys) -> np.random.Generator:
    """Philox generator keyed by a tuple of ints/strings."""
    if not keys:
        raise ValueError("at least one seed key required")
    ss = np.random.SeedSequence([_as_int(k) for k in keys])
    return np.random.Generator(np.random.Philox(ss))


def realization_seed(master_seed: int, point_key: tuple, r: int) -> tuple:
    """Key for realization ``r`` of the structural sweep point ``point_key``."""
    return (master_seed, *point_key, r)
