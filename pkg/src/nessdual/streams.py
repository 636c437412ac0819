"""Per-trajectory random streams.

A stream is keyed by ``(seed, trajectory_index)``. numpy's SeedSequence hashes
the pair with an avalanche mix, so neighbouring indices give unrelated PCG64
states and ensembles can be split across workers without overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class StepParams:
    dt: float = 1e-3
    seed: int = 0
    trajectory_index: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.trajectory_index < 0:
            raise ValueError("trajectory_index must be non-negative")

    def rng(self) -> np.random.Generator:
        return make_rng(self.seed, self.trajectory_index)


def make_rng(seed: int, trajectory_index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & _MASK64, trajectory_index & _MASK64])
    return np.random.Generator(np.random.PCG64(ss))
