"""Deterministic seed derivation: every random draw is reachable from the master seed."""

from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit seed from the master seed and a label path."""
    h = hashlib.sha256()
    h.update(str(int(master_seed)).encode())
    for part in parts:
        h.update(b"|")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "big")


def trial_seed(master_seed: int, terrain: str, algorithm: str, trial: int) -> int:
    return derive_seed(master_seed, terrain, algorithm, trial)
