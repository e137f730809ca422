"""Optimization problems seen by the evolutionary algorithms.

A problem maps a batch of genomes to objective scores in maximization sense.
The tax problem is stochastic; within a run its fitness is made a
deterministic function of the genome by seeding every simulation from a hash
of the run seed and the genome's bytes.
"""

from __future__ import annotations

import hashlib
from typing import Callable, Sequence

import numpy as np

from normopt.moea.operators import GenomeSpace, norm_space
from normopt.society import SimulationConfig, run_paths
from normopt.values import TWO_OBJECTIVES, check_objective_set, objective_scores


def genome_seed(run_seed: int, genes: np.ndarray, salt: bytes = b"") -> int:
    """Stable 64-bit seed from a run seed and the exact bits of one genome."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(run_seed).to_bytes(16, "little", signed=True))
    h.update(salt)
    h.update(np.ascontiguousarray(genes, dtype="<f8").tobytes())
    return int.from_bytes(h.digest(), "little")


class Problem:
    """Base class: ``evaluate`` returns an (N, m) array to be maximized."""

    objective_set: tuple[str, ...]
    space: GenomeSpace

    @property
    def num_objectives(self) -> int:
        return len(self.objective_set)

    @property
    def num_variables(self) -> int:
        return self.space.size

    def evaluate(self, genes: np.ndarray, run_seed: int, samples: int = 1) -> np.ndarray:
        raise NotImplementedError

    def reevaluate(self, genes: np.ndarray, samples: int, run_seed: int) -> np.ndarray:
        """Scores used for reporting; deterministic problems just evaluate again."""
        return self.evaluate(genes, run_seed)

    def minimizer(self, config) -> "Callable[[np.ndarray], np.ndarray]":
        """Closure returning negated scores, the internal convention of every algorithm."""
        return lambda genes: -self.evaluate(genes, config.seed, config.eval_samples)


class TaxProblem(Problem):
    """Norm synthesis for the tax society.

    Args:
        objective_set: names of the values to maximize.
        simulation: society parameters.
    """

    def __init__(
        self,
        objective_set: Sequence[str] = TWO_OBJECTIVES,
        simulation: SimulationConfig | None = None,
    ):
        self.objective_set = check_objective_set(objective_set)
        self.simulation = simulation or SimulationConfig()
        self.simulation.validate()
        self.space = norm_space(self.simulation.num_groups)

    def _scores(self, genes: np.ndarray, samples: int, run_seed: int, salt: bytes) -> np.ndarray:
        genes = np.atleast_2d(genes)
        seeds = []
        for row in genes:
            root = np.random.SeedSequence(genome_seed(run_seed, row, salt))
            seeds.extend(root.spawn(samples) if samples > 1 else [root])
        batch = np.repeat(genes, samples, axis=0)
        state = run_paths(self.simulation, batch, seeds)
        scores = objective_scores(state, batch, self.objective_set, strict=False)
        return scores.reshape(len(genes), samples, -1).mean(axis=1)

    def evaluate(self, genes: np.ndarray, run_seed: int, samples: int = 1) -> np.ndarray:
        """Mean scores over ``samples`` paths per genome, seeded from the genome's bits."""
        return self._scores(genes, samples, run_seed, b"")

    def reevaluate(self, genes: np.ndarray, samples: int, run_seed: int) -> np.ndarray:
        """Average ``samples`` fresh paths per genome, one genome at a time to bound memory."""
        genes = np.atleast_2d(genes)
        out = np.empty((len(genes), self.num_objectives))
        for i, row in enumerate(genes):
            out[i] = self._scores(row, samples, run_seed, b"final")[0]
        return out


class ParabolaProblem(Problem):
    """One variable ``x`` in [-2, 4]; maximize ``-x**2`` and ``-(x - 2)**2``.

    The Pareto set is ``x`` in [0, 2]. Used as an analytic benchmark.
    """

    objective_set = ("f1", "f2")

    def __init__(self, lower: float = -2.0, upper: float = 4.0):
        self.space = GenomeSpace(np.array([lower]), np.array([upper]))

    def evaluate(self, genes: np.ndarray, run_seed: int = 0, samples: int = 1) -> np.ndarray:
        x = np.atleast_2d(genes)[:, 0]
        return np.column_stack([-(x**2), -((x - 2.0) ** 2)])

    @staticmethod
    def true_front(points: int = 2001) -> np.ndarray:
        x = np.linspace(0.0, 2.0, points)
        return np.column_stack([-(x**2), -((x - 2.0) ** 2)])
