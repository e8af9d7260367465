"""Deterministic seed derivation.

Every stochastic component draws from a Generator seeded by hashing a
master seed together with a context string (datapoint label, calibration
cell, replica index).  Runs are then reproducible regardless of execution
order or parallelism, and independent streams never share state.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed", "rng_for"]


def derive_seed(master_seed: int, *context) -> int:
    """Map (master seed, context parts) to a stable 63-bit seed."""
    text = ":".join([str(int(master_seed))] + [str(c) for c in context])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def rng_for(master_seed: int, *context) -> np.random.Generator:
    """Generator seeded from :func:`derive_seed` of the same arguments."""
    return np.random.default_rng(derive_seed(master_seed, *context))
