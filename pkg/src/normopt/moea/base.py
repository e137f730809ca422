"""Configuration and population containers shared by all algorithms."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterator

import numpy as np

from normopt.errors import ConfigurationError
from normopt.values import ObjectiveVector

NSGA2 = "NSGA-II"
SPEA2 = "SPEA2"
MOEADD = "MOEA/DD"
MOMBI2 = "MOMBI2"
ALGORITHMS = (NSGA2, SPEA2, MOEADD, MOMBI2)

_ALIASES = {a.lower().replace("-", "").replace("/", ""): a for a in ALGORITHMS}
_ALIASES.update(nsga2=NSGA2, mombiii=MOMBI2)


def canonical_algorithm(name: str) -> str:
    """Map a user-supplied name such as ``nsga2`` or ``moea-dd`` to its canonical id."""
    key = str(name).lower().replace("-", "").replace("/", "").replace("_", "")
    if key not in _ALIASES:
        raise ConfigurationError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
    return _ALIASES[key]


def default_population_size(num_objectives: int) -> int:
    return 100 if num_objectives <= 2 else 210


@dataclass(frozen=True)
class MoeaConfig:
    """Evolutionary-search parameters.

    ``population_size`` and ``mutation_prob`` default to ``None``, meaning
    100 (2 objectives) or 210 (more), and ``1 / number of genes``.
    """

    algorithm: str = NSGA2
    population_size: int | None = None
    generations: int = 500
    eta_c: float = 20.0
    crossover_prob: float = 0.9
    eta_m: float = 20.0
    mutation_prob: float | None = None
    neighborhood_size: int = 10
    replacement_limit: int = 1
    neighborhood_prob: float = 0.9
    pbi_theta: float = 5.0
    seed: int = 0
    eval_samples: int = 5
    final_samples: int = 5000

    def validate(self) -> "MoeaConfig":
        canonical_algorithm(self.algorithm)
        if self.population_size is not None and self.population_size < 2:
            raise ConfigurationError(f"population_size must be >= 2, got {self.population_size}")
        if self.generations < 0:
            raise ConfigurationError(f"generations must be >= 0, got {self.generations}")
        for name in ("crossover_prob", "neighborhood_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1]")
        if self.mutation_prob is not None and not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigurationError("mutation_prob must lie in [0, 1]")
        if self.eta_c < 0 or self.eta_m < 0:
            raise ConfigurationError("distribution indices must be nonnegative")
        if self.neighborhood_size < 2:
            raise ConfigurationError("neighborhood_size must be >= 2")
        if self.replacement_limit < 1:
            raise ConfigurationError("replacement_limit must be >= 1")
        if self.eval_samples < 1 or self.final_samples < 0:
            raise ConfigurationError("eval_samples must be >= 1 and final_samples >= 0")
        return self

    def resolved(self, num_objectives: int, num_variables: int) -> "MoeaConfig":
        """Copy with defaults that depend on the problem filled in."""
        return replace(
            self,
            algorithm=canonical_algorithm(self.algorithm),
            population_size=self.population_size or default_population_size(num_objectives),
            mutation_prob=1.0 / num_variables if self.mutation_prob is None else self.mutation_prob,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MoeaConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown moea config keys: {sorted(unknown)}")
        return cls(**data).validate()


@dataclass(frozen=True)
class Individual:
    genome: np.ndarray
    objectives: ObjectiveVector
    rank: int = 0
    crowding: float = 0.0
    strength_fitness: float = 0.0
    scalarized_utility: float = 0.0


@dataclass
class Population:
    """Genomes and their scores, stored as parallel arrays.

    ``objectives`` are in maximization sense. Per-algorithm bookkeeping
    (rank, crowding, SPEA2 fitness, scalarized utility) is optional.
    """

    genes: np.ndarray
    objectives: np.ndarray
    objective_set: tuple[str, ...]
    rank: np.ndarray | None = None
    crowding: np.ndarray | None = None
    strength_fitness: np.ndarray | None = None
    utility: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.genes)

    def individuals(self) -> Iterator[Individual]:
        for i in range(len(self)):
            yield Individual(
                genome=self.genes[i],
                objectives=ObjectiveVector(tuple(self.objectives[i]), self.objective_set),
                rank=0 if self.rank is None else int(self.rank[i]),
                crowding=0.0 if self.crowding is None else float(self.crowding[i]),
                strength_fitness=0.0 if self.strength_fitness is None else float(self.strength_fitness[i]),
                scalarized_utility=0.0 if self.utility is None else float(self.utility[i]),
            )


GenerationCallback = Callable[[int, Population], None]


def binary_tournament(keys: list[np.ndarray], count: int, rng: np.random.Generator) -> np.ndarray:
    """Pick ``count`` winners of random pairwise contests.

    ``keys`` are compared lexicographically, smaller first. Exact ties are
    settled by a fair coin from ``rng``.
    """
    n = len(keys[0])
    pairs = rng.integers(0, n, size=(count, 2))
    coin = rng.random(count) < 0.5
    a, b = pairs[:, 0], pairs[:, 1]
    first = np.zeros(count, dtype=bool)
    decided = np.zeros(count, dtype=bool)
    for key in keys:
        ka, kb = key[a], key[b]
        better = ~decided & (ka < kb)
        worse = ~decided & (ka > kb)
        first |= better
        decided |= better | worse
    first |= ~decided & coin
    return np.where(first, a, b)


def variation_params(config: MoeaConfig) -> dict:
    return dict(
        eta_c=config.eta_c,
        p_c=config.crossover_prob,
        eta_m=config.eta_m,
        p_m=config.mutation_prob,
    )


def population_from(genes, G, objective_set, **extra) -> Population:
    """Build a population from minimization scores ``G``."""
    return Population(genes=genes, objectives=-G, objective_set=tuple(objective_set), **extra)

