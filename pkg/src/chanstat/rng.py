"""Named, seedable random streams.

A single integer seed expands into one independent ``numpy.random.Generator``
per parameter family.  The child seed of family ``name`` is

    SeedSequence(entropy=seed, spawn_key=(crc32(name.encode()),))

so the same family always receives the same stream regardless of the order in
which families are requested.  This lets an experiment freeze the path
parameters while resampling only the phases.
"""

from __future__ import annotations

import zlib

import numpy as np

#: Families used throughout the package.
FAMILIES = ("beta", "power", "angle", "delay", "doppler", "noise",
            "region", "velocity", "init", "split")


def family_key(name: str) -> int:
    """Spawn key of a stream family (CRC-32 of its UTF-8 name)."""
    return zlib.crc32(name.encode("utf-8"))


class Streams:
    """Lazily created per-family generators derived from one seed."""

    def __init__(self, seed: int = 0):
        seed = int(seed)
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._gens: dict[str, np.random.Generator] = {}

    def __getitem__(self, name: str) -> np.random.Generator:
        gen = self._gens.get(name)
        if gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(family_key(name),))
            gen = np.random.Generator(np.random.PCG64(ss))
            self._gens[name] = gen
        return gen

    def child(self, index: int) -> "Streams":
        """Independent ``Streams`` for task ``index`` (e.g. one per Ξ draw)."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(family_key("child"), int(index)))
        return Streams(int(ss.generate_state(1, dtype=np.uint64)[0]))

    def __repr__(self):
        return f"Streams(seed={self.seed})"


def as_streams(rng) -> Streams:
    """Coerce ``None``, an int seed, a ``Generator`` or ``Streams`` to ``Streams``."""
    if isinstance(rng, Streams):
        return rng
    if rng is None:
        return Streams(0)
    if isinstance(rng, np.random.Generator):
        return Streams(int(rng.integers(0, 2**63)))
    if isinstance(rng, (int, np.integer)):
        return Streams(int(rng))
    raise TypeError(f"cannot build random streams from {type(rng).__name__}")
