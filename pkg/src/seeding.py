"""
Named random streams derived from one master seed.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


def named_stream(seed: int, name: str) -> np.random.Generator:
    """Derive an independent generator for ``name`` from a master seed.

    Args:
        seed: Master seed of the run.
        name: Stream name, e.g. "env" or "learner".

    Returns:
        A generator whose state depends only on (seed, name).
    """
    sequence = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))])
    return np.random.default_rng(sequence)


@dataclass
class RunStreams:
    """The four random streams owned by one simulation run."""
    env: np.random.Generator
    policy: np.random.Generator
    learner: np.random.Generator
    evaluation: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RunStreams":
        """Build every stream of a run from its master seed."""
        return cls(
            env=named_stream(seed, "env"),
            policy=named_stream(seed, "policy"),
            learner=named_stream(seed, "learner"),
            evaluation=named_stream(seed, "evaluation"),
        )
