"""
Derivation of the independent random streams of one experiment seed.
"""
from typing import NamedTuple

import numpy as np


class SeedStreams(NamedTuple):
    embedding: int
    init: int
    training: int


def derive_seeds(seed: int) -> SeedStreams:
    """Split one experiment seed into embedding, parameter-init and training seeds."""
    children = np.random.SeedSequence(seed).spawn(len(SeedStreams._fields))
    return SeedStreams(*(int(child.generate_state(1, dtype=np.uint32)[0]) for child in children))
