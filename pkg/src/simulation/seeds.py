from __future__ import annotations

import zlib

import numpy as np


def _sequence(master: int, replicate: int, tag: str) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=master, spawn_key=(replicate, zlib.crc32(tag.encode("utf-8")))
    )


def derive_seed(master: int, replicate: int, tag: str) -> int:
    """Independent integer seed for one (replicate, purpose) stream."""
    return int(_sequence(master, replicate, tag).generate_state(1, dtype=np.uint64)[0])


def stream(master: int, replicate: int, tag: str) -> np.random.Generator:
    return np.random.default_rng(_sequence(master, replicate, tag))


def generate_master_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
