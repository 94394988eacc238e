"""Covariance matrix adaptation evolution strategy over the gene box [0,1]^n.

Maximizes fitness through the ask/tell protocol with a fixed batch size.
Strategy constants follow the standard published defaults (weighted
recombination of the top half, cumulative step-size adaptation, rank-one
plus rank-mu covariance updates). Box constraints are handled by clipping
sampled candidates coordinate-wise; the told (clipped) candidates drive the
updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigError, OptimizerDegenerateError, ProtocolError, ValidationError
from ..morphology import Genotype


@dataclass(frozen=True)
class CmaState:
    """Read-only snapshot of the strategy state."""

    mean: np.ndarray
    sigma: float
    covariance: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int
    evaluations: int


class CmaEs:
    def __init__(
        self,
        dim: int = 5,
        batch_size: int = 20,
        initial_mean: float | Sequence[float] = 0.5,
        initial_sigma: float = 0.3,
        seed: int = 0,
        lower: float = 0.0,
        upper: float = 1.0,
    ):
        if batch_size < 2:
            raise ConfigError("cma batch_size must be >= 2")
        if not (math.isfinite(initial_sigma) and initial_sigma > 0.0):
            raise ConfigError("cma initial_sigma must be finite and > 0")
        n = int(dim)
        lam = int(batch_size)
        self.dim = n
        self.batch_size = lam
        self.lower = float(lower)
        self.upper = float(upper)
        self._rng = np.random.Generator(np.random.PCG64(seed))

        # selection: positive log-rank weights on the best half
        mu = lam // 2
        raw = np.array([math.log((lam + 1) / 2.0) - math.log(i + 1) for i in range(mu)])
        self.weights = raw / raw.sum()
        self.mu = mu
        self.mueff = float(self.weights.sum() ** 2 / (self.weights ** 2).sum())

        # adaptation constants
        self.c_sigma = (self.mueff + 2.0) / (n + self.mueff + 5.0)
        self.d_sigma = (
            1.0 + 2.0 * max(0.0, math.sqrt((self.mueff - 1.0) / (n + 1.0)) - 1.0) + self.c_sigma
        )
        self.c_c = (4.0 + self.mueff / n) / (n + 4.0 + 2.0 * self.mueff / n)
        self.c_1 = 2.0 / ((n + 1.3) ** 2 + self.mueff)
        self.c_mu = min(
            1.0 - self.c_1,
            2.0 * (self.mueff - 2.0 + 1.0 / self.mueff) / ((n + 2.0) ** 2 + self.mueff),
        )
        self.chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

        self.mean = np.full(n, float(initial_mean)) if np.isscalar(initial_mean) \
            else np.asarray(initial_mean, dtype=np.float64).copy()
        if self.mean.shape != (n,):
            raise ConfigError(f"cma initial_mean must be scalar or length-{n}")
        self.sigma = float(initial_sigma)
        self.cov = np.eye(n)
        self.p_sigma = np.zeros(n)
        self.p_c = np.zeros(n)
        self.generation = 0
        self.evaluations = 0
        self.best_genotype: Genotype | None = None
        self.best_fitness = -math.inf
        self._decompose()

    @property
    def state(self) -> CmaState:
        return CmaState(
            mean=self.mean.copy(),
            sigma=self.sigma,
            covariance=self.cov.copy(),
            p_sigma=self.p_sigma.copy(),
            p_c=self.p_c.copy(),
            generation=self.generation,
            evaluations=self.evaluations,
        )

    def _decompose(self) -> None:
        """Eigendecompose C into B, D and cache C^(-1/2); repair to SPD if drifted."""
        self.cov = 0.5 * (self.cov + self.cov.T)
        if not np.all(np.isfinite(self.cov)):
            raise OptimizerDegenerateError("covariance became non-finite")
        try:
            eigvals, basis = np.linalg.eigh(self.cov)
        except np.linalg.LinAlgError as exc:
            raise OptimizerDegenerateError(f"covariance decomposition failed: {exc}") from exc
        if not np.all(np.isfinite(eigvals)):
            raise OptimizerDegenerateError("covariance eigenvalues are non-finite")
        floor = max(eigvals.max(), 0.0) * 1e-14
        if floor <= 0.0:
            raise OptimizerDegenerateError("covariance collapsed to zero")
        if np.any(eigvals <= 0.0):
            eigvals = np.maximum(eigvals, floor)
            self.cov = (basis * eigvals) @ basis.T
        self._eig_d = np.sqrt(eigvals)
        self._eig_b = basis
        self._inv_sqrt = (basis / self._eig_d) @ basis.T

    def ask(self) -> list[Genotype]:
        """Sample batch_size candidates from N(mean, sigma^2 C), clipped into the box."""
        z = self._rng.standard_normal((self.batch_size, self.dim))
        y = z @ (self._eig_b * self._eig_d).T
        x = np.clip(self.mean + self.sigma * y, self.lower, self.upper)
        return [Genotype.from_array(row) for row in x]

    def tell(self, batch: Sequence[tuple[Genotype, float]]) -> None:
        """Rank-based strategy update from (genotype, fitness) pairs of one ask."""
        if len(batch) != self.batch_size:
            raise ProtocolError(f"tell expects {self.batch_size} results, got {len(batch)}")
        fits = np.array([f for _, f in batch], dtype=np.float64)
        if not np.all(np.isfinite(fits)):
            raise ValidationError("fitness values must be finite")
        xs = np.array([g.as_array() for g, _ in batch])
        self.evaluations += len(batch)

        order = np.argsort(-fits, kind="stable")  # maximization
        if fits[order[0]] > self.best_fitness:
            self.best_fitness = float(fits[order[0]])
            self.best_genotype = batch[int(order[0])][0]

        n = self.dim
        old_mean = self.mean
        y_sel = (xs[order[: self.mu]] - old_mean) / self.sigma
        y_w = self.weights @ y_sel
        self.mean = old_mean + self.sigma * y_w

        self.p_sigma = (1.0 - self.c_sigma) * self.p_sigma + math.sqrt(
            self.c_sigma * (2.0 - self.c_sigma) * self.mueff
        ) * (self._inv_sqrt @ y_w)
        ps_norm = float(np.linalg.norm(self.p_sigma))
        gen1 = self.generation + 1
        h_sigma = ps_norm / math.sqrt(
            1.0 - (1.0 - self.c_sigma) ** (2 * gen1)
        ) < (1.4 + 2.0 / (n + 1.0)) * self.chi_n
        self.p_c = (1.0 - self.c_c) * self.p_c + (
            math.sqrt(self.c_c * (2.0 - self.c_c) * self.mueff) * y_w if h_sigma else 0.0
        )

        rank_mu = (y_sel * self.weights[:, None]).T @ y_sel
        hs_fix = (1.0 - float(h_sigma)) * self.c_c * (2.0 - self.c_c)
        self.cov = (
            (1.0 - self.c_1 - self.c_mu) * self.cov
            + self.c_1 * (np.outer(self.p_c, self.p_c) + hs_fix * self.cov)
            + self.c_mu * rank_mu
        )
        self.sigma *= math.exp((self.c_sigma / self.d_sigma) * (ps_norm / self.chi_n - 1.0))
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise OptimizerDegenerateError("step size became invalid")
        self.generation += 1
        self._decompose()
