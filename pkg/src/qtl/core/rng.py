"""
Counter-addressable random streams.

Every random draw in an experiment comes from a generator addressed by
(seed, stream name, index), so results do not depend on how work is scheduled
across threads.
"""

import zlib

import numpy as np


def stream_key(name: str) -> int:
    """Stable 32-bit key for a stream name."""
    return zlib.crc32(name.encode("utf-8"))


class StreamFactory:
    """
    Derives independent Philox generators from one 64-bit seed.

    Usage:
        streams = StreamFactory(1234)
        rng = streams.stream("interaction", 0)
    """

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)

    def stream(self, name: str, index: int = 0) -> np.random.Generator:
        """Return the generator for sub-stream (name, index)."""
        sequence = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(stream_key(name), int(index)),
        )
        return np.random.Generator(np.random.Philox(sequence))

    def __repr__(self) -> str:
        return f"<StreamFactory seed={self.seed}>"
