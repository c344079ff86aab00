"""Deterministic child seeds derived from a master seed and a text label.

Every random stream in a run is keyed by a human-readable label such as
"init/actor0" or "episode/1234", so adding or removing one consumer never
shifts the draws seen by any other.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(master: int, label: str) -> int:
    """Hash (master, label) into a nonnegative 63-bit seed."""
    digest = hashlib.sha256(f"{master}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little") & (2**63 - 1)


def child_rng(master: int, label: str) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, label))
