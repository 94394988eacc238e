"""Grid-archive quality diversity search: uniform elite selection + Gaussian mutation."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import ConfigError, ProtocolError
from ..evaluation import GaitResult
from ..morphology import Genotype
from .archive import Archive, DescriptorBounds, DEFAULT_GRID_SIZE


class QdOptimizer:
    """Ask/tell MAP-style illumination over the gene box [0,1]^dim.

    The first init_budget candidates are uniform random; afterwards each
    candidate perturbs a uniformly chosen archive elite with isotropic
    Gaussian noise (falling back to uniform while the archive is empty).
    """

    def __init__(
        self,
        bounds: DescriptorBounds,
        batch_size: int = 20,
        mutation_sigma: float = 0.1,
        init_budget: int = 100,
        seed: int = 0,
        dim: int = 5,
        grid_size: int = DEFAULT_GRID_SIZE,
    ):
        if not (math.isfinite(mutation_sigma) and mutation_sigma > 0.0):
            raise ConfigError("qd mutation_sigma must be finite and > 0")
        if batch_size < 1:
            raise ConfigError("qd batch_size must be >= 1")
        if init_budget < 0:
            raise ConfigError("qd init_budget must be >= 0")
        self.archive = Archive(bounds, grid_size)
        self.batch_size = int(batch_size)
        self.mutation_sigma = float(mutation_sigma)
        self.init_budget = int(init_budget)
        self.dim = int(dim)
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self.asked = 0
        self.told = 0

    def ask(self) -> list[Genotype]:
        out: list[Genotype] = []
        elites = self.archive.elites()
        for _ in range(self.batch_size):
            if self.asked < self.init_budget or not elites:
                x = self._rng.random(self.dim)
            else:
                parent = elites[int(self._rng.integers(len(elites)))]
                x = np.clip(
                    parent.genotype.as_array()
                    + self._rng.normal(0.0, self.mutation_sigma, self.dim),
                    0.0,
                    1.0,
                )
            self.asked += 1
            out.append(Genotype.from_array(x))
        return out

    def tell(self, batch: Sequence[tuple[Genotype, GaitResult]]) -> None:
        if len(batch) != self.batch_size:
            raise ProtocolError(f"tell expects {self.batch_size} results, got {len(batch)}")
        for genotype, result in batch:
            self.archive.offer(genotype, result)
        self.told += len(batch)
        if __debug__:
            self.archive.validate()
