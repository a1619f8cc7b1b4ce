"""Named random sub-streams derived from a single root seed."""

import hashlib
from typing import Union

import numpy as np

Key = Union[str, int]


def _spawn_key(names) -> tuple:
    """Stable 32-bit words for a name path (Python's hash() is salted per process)."""
    words = []
    for name in names:
        digest = hashlib.sha256(str(name).encode("utf-8")).digest()
        words.append(int.from_bytes(digest[:4], "big"))
    return tuple(words)


def substream(seed: int, *names: Key) -> np.random.Generator:
    """Independent generator for `names` under `seed`.

    substream(7, "trace", "aws:us-east-1a") never depends on which other
    streams were drawn, so components can be varied independently.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=_spawn_key(names))
    return np.random.default_rng(sequence)
