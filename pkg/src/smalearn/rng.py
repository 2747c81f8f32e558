"""Labeled seed splitting.

Every random stream in a run is derived from one master seed plus a tuple of
labels, so the stream a component sees never depends on how many draws other
components made before it.
"""

from __future__ import annotations

import zlib

import numpy as np


def _label_word(label) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError(f"integer labels must be non-negative, got {label}")
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def derive_seed(seed: int, *labels) -> np.random.SeedSequence:
    """Return the seed sequence for ``labels`` under master ``seed``."""
    return np.random.SeedSequence([int(seed), *(_label_word(x) for x in labels)])


def derive_rng(seed: int, *labels) -> np.random.Generator:
    """Independent generator for the stream named by ``labels``."""
    return np.random.default_rng(derive_seed(seed, *labels))
