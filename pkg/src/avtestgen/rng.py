"""Seed derivation and the per-run random generators.

Seeds are derived with the SplitMix64 finalizer, chained over the parts of a
key such as ``(base_seed, n_agents, run_index, stream)``. Each derived seed
initialises a stdlib Mersenne Twister, and every stochastic draw goes through
``Random.random()``, whose output sequence for a given seed is stable across
Python versions.
"""

from __future__ import annotations

import random

MASK64 = (1 << 64) - 1

GENERATOR_ID = "splitmix64-chain -> python random.Random (MT19937), draws via random() only"

SPAWN_STREAM = 0x5350
DECISION_STREAM = 0x4445


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    h = 0
    for p in parts:
        h = splitmix64(h ^ (p & MASK64))
    return h


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def randbelow(rng: random.Random, n: int) -> int:
    return min(int(rng.random() * n), n - 1)
