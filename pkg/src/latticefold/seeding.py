"""Deterministic derivation of independent random streams.

Every stochastic component takes a master seed and mixes in integer
context tags through numpy's SeedSequence, so distinct (seed, context)
pairs get independent, reproducible streams.
"""

from __future__ import annotations

import numpy as np


def derive_rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


def derive_seed(*entropy: int) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1, dtype=np.uint64)[0])
