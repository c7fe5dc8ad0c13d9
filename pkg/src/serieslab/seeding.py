"""Named random substreams derived from one 64-bit seed.

Every consumer asks for its own stream by name, so adding a consumer never
shifts the draws seen by the others.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

SEED_MAX = 2**64 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "little")


def stream(seed, *names: str) -> np.random.Generator:
    """A PCG64 generator keyed by ``seed`` and the path of stream names."""
    key = tuple(_name_key(n) for n in names)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(check_seed(seed), spawn_key=key)))


def digest(params: dict) -> str:
    """Short stable hash of a JSON-serialisable parameter record."""
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
