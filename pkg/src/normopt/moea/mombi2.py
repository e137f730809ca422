"""MOMBI2: many-objective search ranked by R2 achievement-scalarizing utilities."""

from __future__ import annotations

from collections import deque

import numpy as np

from normopt.moea.base import (
    GenerationCallback,
    MoeaConfig,
    Population,
    binary_tournament,
    population_from,
    variation_params,
)
from normopt.moea.operators import make_offspring
from normopt.moea.problem import Problem
from normopt.moea.weights import weight_vectors


def achievement(F: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Achievement scalarizing values ``max_j F_j / w_j``, shape (n, k).

    ``F`` is normalized and nonnegative (minimization). Components with zero
    weight are left out, so ``w = (1, 0)`` scores by the first objective alone.
    """
    F = np.atleast_2d(F)
    positive = weights > 0
    safe = np.where(positive, weights, 1.0)
    ratio = F[:, None, :] / safe[None, :, :]
    ratio = np.where(positive[None, :, :], ratio, -np.inf)
    return ratio.max(axis=2)


def r2_ranking(F: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rank and utility of every row of normalized minimization scores ``F``.

    For each weight vector the points are ordered by achievement value, ties
    going to the smaller Euclidean norm. A point's rank is its best 1-based
    position over all weights; its utility is its smallest achievement value.
    """
    U = achievement(F, weights)
    norm = np.linalg.norm(F, axis=1)
    n = len(F)
    rank = np.full(n, n, dtype=int)
    positions = np.arange(1, n + 1)
    for j in range(len(weights)):
        order = np.lexsort((norm, U[:, j]))
        pos = np.empty(n, dtype=int)
        pos[order] = positions
        np.minimum(rank, pos, out=rank)
    return rank, U.min(axis=1)


class ReferencePoints:
    """Ideal and nadir estimates used to normalize objectives (minimization).

    The ideal point is the running minimum of everything observed. The nadir
    follows a variance test on the last ``record_size`` population maxima:
    on the first update, or when any objective's recorded maxima vary by more
    than ``alpha``, the nadir is reset to the current maxima; otherwise it is
    kept. Any objective whose nadir lies within ``epsilon`` of the ideal is
    widened to the largest recorded maximum, and failing that to
    ``ideal + epsilon``.
    """

    def __init__(self, alpha: float = 0.5, epsilon: float = 1e-3, record_size: int = 5):
        self.alpha, self.epsilon = alpha, epsilon
        self.record: deque[np.ndarray] = deque(maxlen=record_size)
        self.ideal: np.ndarray | None = None
        self.nadir: np.ndarray | None = None

    def update(self, G: np.ndarray) -> None:
        low, high = G.min(axis=0), G.max(axis=0)
        first = self.ideal is None
        self.ideal = low if first else np.minimum(self.ideal, low)
        self.record.append(high)
        spread = np.var(np.asarray(self.record), axis=0).max()
        if first or spread > self.alpha:
            self.nadir = high.copy()
        narrow = self.nadir - self.ideal < self.epsilon
        if narrow.any():
            widest = np.asarray(self.record).max(axis=0)
            self.nadir = np.where(narrow, widest, self.nadir)
            narrow = self.nadir - self.ideal < self.epsilon
            self.nadir = np.where(narrow, self.ideal + self.epsilon, self.nadir)

    def normalize(self, G: np.ndarray) -> np.ndarray:
        return (G - self.ideal) / (self.nadir - self.ideal)


def mombi2_run(problem: Problem, config: MoeaConfig, callback: GenerationCallback | None = None) -> Population:
    """Run MOMBI2 with one weight vector per population slot."""
    config = config.validate().resolved(problem.num_objectives, problem.num_variables)
    weights = weight_vectors(config.population_size, problem.num_objectives)
    rng = np.random.default_rng(config.seed)
    space, n = problem.space, config.population_size
    evaluate = problem.minimizer(config)
    X = space.random(n, rng)
    G = evaluate(X)
    ref = ReferencePoints()
    ref.update(G)
    rank, utility = r2_ranking(ref.normalize(G), weights)
    if callback:
        callback(0, population_from(X, G, problem.objective_set))
    for gen in range(1, config.generations + 1):
        parents = binary_tournament([rank, utility], n, rng)
        children = make_offspring(X[parents], n, rng, space, **variation_params(config))
        X, G = np.vstack([X, children]), np.vstack([G, evaluate(children)])
        ref.update(G)
        rank, utility = r2_ranking(ref.normalize(G), weights)
        keep = np.lexsort((utility, rank))[:n]
        X, G, rank, utility = X[keep], G[keep], rank[keep], utility[keep]
        if callback:
            callback(gen, population_from(X, G, problem.objective_set))
    return population_from(X, G, problem.objective_set, rank=rank - 1, utility=utility)
