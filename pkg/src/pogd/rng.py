"""Named, independent random substreams derived from one experiment seed.

Every consumer of randomness (weight init, shuffling, dropout, optimizer
draws, ...) gets its own named generator, so adding or removing draws in
one consumer never perturbs the others.
"""

import hashlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Return a generator keyed by (seed, name).

    The name is hashed with SHA-256, so streams are stable across runs,
    platforms, and Python versions (unlike the builtin ``hash``).
    """
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([seed, key]))
