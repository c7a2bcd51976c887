"""Named random substreams derived from one global seed."""

import zlib

import numpy as np


def substream(seed, *names):
    """Return a Generator for the stream identified by ``names``.

    Each name is hashed (CRC-32) into the seed entropy, so adding a new
    stage elsewhere never shifts the numbers an existing stage sees.
    """
    entropy = [int(seed) & 0xFFFFFFFF]
    for name in names:
        if isinstance(name, (int, np.integer)):
            entropy.append(int(name) & 0xFFFFFFFF)
        else:
            entropy.append(zlib.crc32(str(name).encode("utf-8")))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed, *names):
    """Integer seed for a named substream (for passing to other components)."""
    return int(substream(seed, *names).integers(0, 2**31 - 1))
