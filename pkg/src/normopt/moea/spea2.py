"""SPEA2: strength Pareto evolutionary algorithm with an external archive."""

from __future__ import annotations

import numpy as np
from numba import njit

from normopt.moea.base import (
    GenerationCallback,
    MoeaConfig,
    Population,
    binary_tournament,
    population_from,
    variation_params,
)
from normopt.moea.operators import make_offspring
from normopt.moea.pareto import dominance_matrix_min
from normopt.moea.problem import Problem


def pairwise_distances(G: np.ndarray) -> np.ndarray:
    diff = G[:, None, :] - G[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    return dist


def strength_fitness(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """SPEA2 fitness (lower is better) and the raw fitness component.

    Strength ``S(i)`` counts the points ``i`` dominates; raw fitness ``R(j)``
    sums the strengths of ``j``'s dominators; density is ``1 / (sigma_k + 2)``
    with ``sigma_k`` the distance to the k-th nearest neighbour,
    ``k = floor(sqrt(len(G)))``.
    """
    n = len(G)
    D = dominance_matrix_min(G)
    strength = D.sum(axis=1)
    raw = (D * strength[:, None]).sum(axis=0).astype(float)
    if n == 1:
        return raw + 0.5, raw
    k = min(max(int(np.sqrt(n)), 1), n - 1)
    sigma = np.partition(pairwise_distances(G), k - 1, axis=1)[:, k - 1]
    return raw + 1.0 / (sigma + 2.0), raw


@njit(cache=True)
def _truncate(dist, order, keep):
    # Remove, one at a time, the point whose ascending distance list to the
    # surviving points is lexicographically smallest.
    n = dist.shape[0]
    alive = np.ones(n, dtype=np.bool_)
    for _ in range(n - keep):
        worst = -1
        for i in range(n):
            if not alive[i]:
                continue
            if worst < 0:
                worst = i
                continue
            a = 0
            b = 0
            while True:
                while a < n and not alive[order[i, a]]:
                    a += 1
                while b < n and not alive[order[worst, b]]:
                    b += 1
                if a >= n or b >= n:
                    break
                da = dist[i, order[i, a]]
                db = dist[worst, order[worst, b]]
                if da < db:
                    worst = i
                    break
                if da > db:
                    break
                a += 1
                b += 1
        alive[worst] = False
    return alive


def truncate(G: np.ndarray, keep: int) -> np.ndarray:
    """Boolean mask of the ``keep`` points that survive nearest-neighbour truncation."""
    dist = pairwise_distances(G)
    order = np.argsort(dist, axis=1, kind="stable")
    return _truncate(dist, order, keep)


def environmental_selection(G: np.ndarray, fitness: np.ndarray, size: int) -> np.ndarray:
    """Indices of the next archive."""
    nondominated = np.flatnonzero(fitness < 1.0)
    if len(nondominated) == size:
        return nondominated
    if len(nondominated) < size:
        return np.argsort(fitness, kind="stable")[:size]
    return nondominated[truncate(G[nondominated], size)]


def spea2_run(problem: Problem, config: MoeaConfig, callback: GenerationCallback | None = None) -> Population:
    """Run SPEA2; population and archive both have ``population_size`` members.

    Returns the final archive.
    """
    config = config.validate().resolved(problem.num_objectives, problem.num_variables)
    rng = np.random.default_rng(config.seed)
    space, n = problem.space, config.population_size
    evaluate = problem.minimizer(config)
    X = space.random(n, rng)
    G = evaluate(X)
    AX, AG = np.empty((0, space.size)), np.empty((0, problem.num_objectives))
    gen = 0
    while True:
        UX, UG = np.vstack([X, AX]), np.vstack([G, AG])
        fitness, _ = strength_fitness(UG)
        keep = environmental_selection(UG, fitness, n)
        AX, AG, fitness = UX[keep], UG[keep], fitness[keep]
        if callback:
            callback(gen, population_from(AX, AG, problem.objective_set))
        if gen == config.generations:
            break
        gen += 1
        parents = binary_tournament([fitness], n, rng)
        X = make_offspring(AX[parents], n, rng, space, **variation_params(config))
        G = evaluate(X)
    return population_from(AX, AG, problem.objective_set, strength_fitness=fitness)
